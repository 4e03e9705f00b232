#include "elicit/pool_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "elicit/error.hpp"
#include "elicit/text.hpp"

namespace elicit {

namespace {

constexpr char kMagic[8] = {'E', 'L', 'P', 'O', 'O', 'L', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("pool file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_pool_binary(const DataPool& pool, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, pool.size());
  put_u64(out, pool.feature_dim());
  for (const Example& ex : pool.examples()) put_u64(out, ex.id);
  for (const Example& ex : pool.examples()) out.put(static_cast<char>(ex.true_label));
  for (std::size_t c = 0; c < pool.feature_dim(); ++c) {
    for (const Example& ex : pool.examples()) put_f64(out, ex.features[c]);
  }
  if (!out) throw FormatError("failed writing pool");
}

DataPool read_pool_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("not an elicit pool file (bad magic)");
  }
  const std::uint64_t n = get_u64(in);
  const std::uint64_t dim = get_u64(in);
  std::vector<Example> examples(n);
  for (auto& ex : examples) ex.id = get_u64(in);
  for (auto& ex : examples) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw FormatError("pool file truncated");
    ex.true_label = static_cast<std::uint8_t>(c);
  }
  for (auto& ex : examples) ex.features.resize(dim);
  for (std::uint64_t c = 0; c < dim; ++c) {
    for (auto& ex : examples) ex.features[c] = get_f64(in);
  }
  return DataPool(dim, std::move(examples));
}

void write_pool_csv(const DataPool& pool, std::ostream& out) {
  out << "id,label";
  for (std::size_t c = 0; c < pool.feature_dim(); ++c) out << ",f" << c;
  out << '\n';
  for (const Example& ex : pool.examples()) {
    out << ex.id << ',' << static_cast<int>(ex.true_label);
    for (double f : ex.features) out << ',' << text::format_double(f);
    out << '\n';
  }
  if (!out) throw FormatError("failed writing pool CSV");
}

DataPool read_pool_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty pool CSV");
  const auto header = text::split_csv(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw FormatError("pool CSV header must start with id,label");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t c = 0; c < dim; ++c) {
    if (header[c + 2] != "f" + std::to_string(c)) {
      throw FormatError("unexpected pool CSV column '" + std::string(header[c + 2]) + "'");
    }
  }
  std::vector<Example> examples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = text::split_csv(line);
    if (fields.size() != dim + 2) throw FormatError("pool CSV row has wrong field count");
    Example ex;
    ex.id = text::parse_uint(fields[0]);
    const auto label = text::parse_uint(fields[1]);
    if (label > 1) throw FormatError("pool CSV label must be 0 or 1");
    ex.true_label = static_cast<std::uint8_t>(label);
    ex.features.reserve(dim);
    for (std::size_t c = 0; c < dim; ++c) ex.features.push_back(text::parse_double(fields[c + 2]));
    examples.push_back(std::move(ex));
  }
  return DataPool(dim, std::move(examples));
}

void save_pool_binary(const DataPool& pool, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_pool_binary(pool, out);
}

DataPool load_pool_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_pool_binary(in);
}

void save_pool_csv(const DataPool& pool, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_pool_csv(pool, out);
}

DataPool load_pool_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_pool_csv(in);
}

}  // namespace elicit
