#pragma once

#include <filesystem>
#include <iosfwd>

#include "elicit/synth_tasks.hpp"

namespace elicit {

// Columnar little-endian layout:
//   magic "ELPOOL01" | u64 n | u64 dim | u64 ids[n] | u8 labels[n] |
//   f64 features[dim][n] (one column per feature)
void write_pool_binary(const DataPool& pool, std::ostream& out);
DataPool read_pool_binary(std::istream& in);

// CSV with header `id,label,f0,...,f{d-1}`; doubles use shortest round-trip form.
void write_pool_csv(const DataPool& pool, std::ostream& out);
DataPool read_pool_csv(std::istream& in);

void save_pool_binary(const DataPool& pool, const std::filesystem::path& path);
DataPool load_pool_binary(const std::filesystem::path& path);
void save_pool_csv(const DataPool& pool, const std::filesystem::path& path);
DataPool load_pool_csv(const std::filesystem::path& path);

}  // namespace elicit
