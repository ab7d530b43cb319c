#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slideagg/types.hpp"

namespace slideagg {

// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitPipeline = 1,
  kExitIo = 2,
  kExitValidation = 3,
  kExitUsage = 64,
};

// Probability grid for one slide: one cell per 100 px patch, cell index
// floor(coordinate / 100), cropped to the bounding box of occupied cells.
// Rows run top to bottom (y), columns left to right (x); empty cells are
// blank and a cell hit by several patches keeps the highest probability.
// An empty slide produces an empty string.
std::string heatmap_csv(const SlideRecord& slide);

// Entry point behind the `slideagg` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slideagg
