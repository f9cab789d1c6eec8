#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "arrayloc/geometry.hpp"
#include "arrayloc/ranging.hpp"
#include "arrayloc/snr.hpp"

namespace arrayloc {

/// %.17g, which round-trips every double.
std::string format_double(double v);

/// Numeric CSV with a header row of column names. Blank or "nan" cells come
/// back as NaN.
Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path);

/// Square matrix under an "n0,n1,..." header; NaN cells are written blank.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Squared-distance CSV; blank or nan off-diagonal cells are unobserved.
Edm read_edm_csv(const std::filesystem::path& path);
void write_edm_csv(const std::filesystem::path& path, const Edm& d);

AdjacencyMask read_mask_csv(const std::filesystem::path& path);

/// One row per dimension, one column per node.
NodeLayout read_layout_csv(const std::filesystem::path& path);
void write_layout_csv(const std::filesystem::path& path, const NodeLayout& layout);

/// Header i0,q0,i1,q1,...; one row per sample, one I/Q column pair per window.
SampleMatrix read_iq_csv(const std::filesystem::path& path);

/// Two columns, i and q, one row per sample.
void write_waveform_csv(const std::filesystem::path& path, const Signal& s);

}  // namespace arrayloc
