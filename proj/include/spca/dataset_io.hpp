#ifndef SPCA_DATASET_IO_HPP
#define SPCA_DATASET_IO_HPP

// Dataset loading. Two on-disk formats are understood:
//   csv  one sample per row, comma-separated decimals; a header row is
//        detected (and skipped) when its first token is not numeric
//   idx  big-endian binary images: u32 magic 0x00000803, u32 dims
//        {count, rows, cols}, then count*rows*cols pixel bytes which are
//        scaled from 0..255 to [0, 1]
// Samples are returned one per column.

#include <string>

#include "spca/estimator.hpp"

namespace spca {

enum class DataFormat { automatic, csv, idx };

MatrixXd load_csv(const std::string& path);
MatrixXd load_idx(const std::string& path);

// automatic: sniff the idx magic, otherwise parse as csv.
MatrixXd load_dataset(const std::string& path,
                      DataFormat format = DataFormat::automatic);

// One sample per row, 17 significant digits, no header.
void save_csv(const std::string& path, const MatrixXd& data);

} // namespace spca

#endif
