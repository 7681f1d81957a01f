#include "synlm/numcore/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "synlm/errors.hpp"

namespace synlm::num {

namespace {
constexpr const char* kMagic = "synlm-checkpoint";

void put_le_double(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

double get_le_double(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw Error(ErrorKind::kData, "checkpoint: truncated tensor data");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}
}  // namespace

void write_checkpoint(std::ostream& out, nlohmann::json metadata, const ParameterSet& params) {
  metadata["format_version"] = kCheckpointFormatVersion;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : params.all()) list.push_back({{"name", p.name}, {"shape", p.tensor->shape}});
  metadata["parameters"] = std::move(list);
  out << kMagic << ' ' << kCheckpointFormatVersion << '\n' << metadata.dump() << '\n';
  for (const auto& p : params.all()) {
    for (double v : p.tensor->values) put_le_double(out, v);
  }
  if (!out) throw Error(ErrorKind::kData, "checkpoint: write failed");
}

nlohmann::json read_checkpoint_metadata(std::istream& in) {
  std::string magic_line;
  if (!std::getline(in, magic_line)) throw Error(ErrorKind::kData, "checkpoint: empty file");
  const std::string expected = std::string(kMagic) + " " + std::to_string(kCheckpointFormatVersion);
  if (magic_line != expected) {
    throw Error(ErrorKind::kData, "checkpoint: bad header '" + magic_line + "', expected '" + expected + "'");
  }
  std::string meta_line;
  if (!std::getline(in, meta_line)) throw Error(ErrorKind::kData, "checkpoint: missing metadata");
  try {
    return nlohmann::json::parse(meta_line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kData, std::string("checkpoint: malformed metadata: ") + e.what());
  }
}

void read_checkpoint_tensors(std::istream& in, const nlohmann::json& metadata, ParameterSet& params) {
  const auto& stored = metadata.at("parameters");
  const auto& all = params.all();
  if (stored.size() != all.size()) {
    throw DimensionError("checkpoint: stores " + std::to_string(stored.size()) + " tensors, model has " +
                         std::to_string(all.size()));
  }
  for (std::size_t k = 0; k < all.size(); ++k) {
    const auto name = stored[k].at("name").get<std::string>();
    const auto shape = stored[k].at("shape").get<Shape>();
    if (name != all[k].name || shape != all[k].tensor->shape) {
      throw DimensionError("checkpoint: tensor " + std::to_string(k) + " is '" + name + "' " +
                           shape_string(shape) + ", model expects '" + all[k].name + "' " +
                           shape_string(all[k].tensor->shape));
    }
  }
  for (const auto& p : all) {
    for (double& v : p.tensor->values) v = get_le_double(in);
  }
}

}  // namespace synlm::num
