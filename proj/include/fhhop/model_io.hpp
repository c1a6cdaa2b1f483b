#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "fhhop/factored_model.hpp"
#include "fhhop/flat_model.hpp"

namespace fhhop {

enum class ModelKind : std::uint8_t { Flat, Factored };

struct ModelDocument {
  std::string name;
  std::map<std::string, std::string> metadata;
  std::variant<FlatModel, FactoredModel> payload;

  ModelKind kind() const noexcept {
    return std::holds_alternative<FlatModel>(payload) ? ModelKind::Flat : ModelKind::Factored;
  }
  const FlatModel& flat() const { return std::get<FlatModel>(payload); }
  const FactoredModel& factored() const { return std::get<FactoredModel>(payload); }

  friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

/// Line-oriented flat grammar (.flatpomdp). See docs/formats.md.
FlatModel parse_flat(std::string_view text);
ModelDocument parse_flat_document(std::string_view text);

/// Line-oriented factored grammar (.fmomdp). See docs/formats.md.
FactoredModel parse_factored(std::string_view text);
ModelDocument parse_factored_document(std::string_view text);

/// Dispatches on the `fmomdp:` header.
ModelDocument parse_document(std::string_view text);

/// Deterministic text; probabilities use 17 significant digits and zero
/// entries are omitted.
std::string serialize(const ModelDocument& document);

ModelDocument load_document(const std::filesystem::path& path);
void save_document(const std::filesystem::path& path, const ModelDocument& document);

/// The factored view of any document; flat payloads go through from_flat.
FactoredModel as_factored(const ModelDocument& document);

/// FNV-1a over the serialized document.
std::uint64_t content_hash(const ModelDocument& document);

}  // namespace fhhop
