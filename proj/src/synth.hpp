#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "data_model.hpp"

namespace secoda {

enum class GeneratorKind { Mountain, Helix, TimeSeries, NoisyMix };

// Labels: 0 = normal bulk, 1..4 = planted anomaly of type I..IV.
//
//   I   extreme value on at least one numerical attribute
//   II  categorical value so rare it occurs at most twice globally
//   III value inside every marginal range yet isolated in the joint
//       numerical space
//   IV  categorical value or combination that is common globally but
//       absent from the case's numerical neighborhood
using LabelVector = std::vector<uint8_t>;

struct PlantCounts {
  int type1 = 0;
  int type2 = 0;
  int type3 = 0;
  int type4 = 0;
  int total() const { return type1 + type2 + type3 + type4; }
};

size_t default_case_count(GeneratorKind kind);
PlantCounts default_plant(GeneratorKind kind);
const char* generator_name(GeneratorKind kind);
std::optional<GeneratorKind> generator_from_name(const std::string& name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Mountain;
  size_t n = 0;  // 0 picks the kind's default
  uint64_t seed = 0;
  std::optional<PlantCounts> plant;  // unset picks the kind's default
};

struct LabeledDataset {
  Dataset data;
  LabelVector labels;
};

// Deterministic in (kind, n, seed, plant). Bulk cases follow the kind's
// structure; every planted anomaly is placed against the measured bulk
// so that its type criterion holds with a wide margin. The emitted row
// order is a seeded shuffle, which makes any prefix a fair subsample.
LabeledDataset generate(const GeneratorSpec& spec);

struct PlantCheck {
  size_t case_id = 0;
  uint8_t type = 0;
  bool pass = false;
  std::string detail;
};

struct PlantReport {
  bool all_pass = true;
  std::vector<PlantCheck> checks;
};

// Re-derives each planted case's type criterion from the data alone.
// Distances are Euclidean over numerical attributes, each normalized by
// the bulk range. Type III isolation compares against the bulk's 99.9th
// percentile nearest-neighbor distance; type IV uses the 25 nearest
// neighbors and requires the case's categorical combination to occur at
// least max(10, 1% of n) times globally.
PlantReport verify_plant(const Dataset& data, const LabelVector& labels);

// "case_id,label" with labels normal and I..IV. Loading accepts rows in
// any order but requires ids to cover 0..n-1 exactly.
std::string labels_to_csv(const LabelVector& labels);
LabelVector labels_from_csv(const std::string& text);
void write_labels(const LabelVector& labels, const std::string& path);
LabelVector load_labels(const std::string& path);

}  // namespace secoda
