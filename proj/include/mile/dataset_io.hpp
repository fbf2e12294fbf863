#pragma once

#include <optional>
#include <string>

#include "mile/types.hpp"

namespace mile {

// Long-format dataset CSV with a header row. Two schemas:
//   individual_id,obs_index,value   (observations keyed by index)
//   individual_id,t,value           (observations on a shared time grid)
// Row order is free; (individual_id, obs_index) resp. (individual_id, t)
// pairs must be unique, every individual must cover the same index set /
// grid, and the grid must be identical across individuals. `horizon` is
// required for the timestamped schema (times must lie inside (0, horizon)).
// Parse errors carry 1-based line numbers.
GroupedDataset read_dataset_csv(const std::string& path,
                                std::optional<double> horizon = std::nullopt);

// Writes the timestamped schema when `data` carries a grid, the indexed
// schema otherwise. Reals carry 17 significant digits.
void write_dataset_csv(const GroupedDataset& data, const std::string& path);

}  // namespace mile
