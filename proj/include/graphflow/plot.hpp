/* Self-contained SVG renderings of a monitor series: the decay of the
 * angle and second-fundamental-form maxima on a log scale, and the volume
 * trace against its exponential-law prediction band.
 */
#pragma once

#include <string>
#include <vector>

#include "graphflow/flow.hpp"

namespace graphflow {

// Writes decay.svg and volume.svg into out_dir. Needs at least two
// records; a guard or numeric termination is annotated on the plots.
void emit_plots(const std::vector<DiagnosticsRecord>& recs, Termination term,
                const std::string& out_dir);

}  // namespace graphflow
