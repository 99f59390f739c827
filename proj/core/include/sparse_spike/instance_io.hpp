#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>

#include "sparse_spike/model.hpp"

namespace sparse_spike {

/// Two on-disk layouts share one JSON header.
///
/// Container (any extension other than .json):
///   offset 0   8 bytes   magic "SSPKINST"
///   offset 8   u32 LE    format version (1)
///   offset 12  u32 LE    reserved, 0
///   offset 16  u64 LE    header length H
///   offset 24  H bytes   UTF-8 JSON header
///   then       rows * cols float64 LE, row-major
///
/// Pair (path ending in .json): the JSON header with an extra "data_file"
/// member naming a sibling file of raw float64 LE row-major entries.
///
/// Header members: format, version, model, rows, cols, signal, seed,
/// spike {dim, flat, support, values}, perturbation {kind, strength, seed} or
/// null, noise {family, scale} or null. Spike values are listed for the
/// support only. Custom noise samplers are not serialised; a custom-symmetric
/// instance loads with its family tag and no sampler.
void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

/// Header-only JSON text for an instance (pair layout without data_file).
std::string instance_header(const Instance& inst);

/// Raw matrix in the pair layout: a JSON file {"rows", "cols", "data_file"}.
/// Used to inject arbitrary perturbations.
void save_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& json_path);
Eigen::MatrixXd load_matrix(const std::filesystem::path& json_path);

}  // namespace sparse_spike
