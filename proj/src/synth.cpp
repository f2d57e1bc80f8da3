#include "synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "csv.hpp"
#include "detector.hpp"  // nearest_rank_quantile
#include "errors.hpp"
#include "rng.hpp"

namespace secoda {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

// Column-major staging area; finalize() shuffles it into a Dataset.
struct Staging {
  Schema schema;
  std::vector<std::vector<double>> num_cols;
  std::vector<std::vector<std::string>> cat_cols;
  LabelVector labels;

  size_t rows() const { return labels.size(); }

  void push_numeric(std::initializer_list<double> values, uint8_t label) {
    size_t c = 0;
    for (double v : values) num_cols[c++].push_back(v);
    labels.push_back(label);
  }
};

LabeledDataset finalize(Staging&& staging, Rng& shuffle_rng) {
  size_t n = staging.rows();
  std::vector<uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle_rng.shuffle(perm.data(), perm.size());

  DatasetBuilder builder(staging.schema, "");
  std::vector<CellValue> cells(staging.schema.size());
  LabelVector labels(n);
  for (size_t row = 0; row < n; ++row) {
    uint32_t src = perm[row];
    size_t num_i = 0, cat_i = 0;
    for (size_t col = 0; col < staging.schema.size(); ++col) {
      if (staging.schema.attributes[col].kind == AttrKind::Numerical) {
        cells[col] = staging.num_cols[num_i++][src];
      } else {
        cells[col] = staging.cat_cols[cat_i++][src];
      }
    }
    builder.add_row(cells);
    labels[row] = staging.labels[src];
  }
  return {std::move(builder).build(), std::move(labels)};
}

double median_of(std::vector<double> v) {
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return 0.5 * (v[mid - 1] + hi);
}

double mad_of(const std::vector<double>& v, double med) {
  std::vector<double> dev(v.size());
  for (size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
  return median_of(std::move(dev));
}

struct BulkStats {
  double med = 0, mad = 0, lo = 0, hi = 0;
  // Offset that provably beats the 3*MAD bar: the largest observed
  // deviation times four, plus a unit.
  double extreme_offset() const {
    return 4.0 * std::max(hi - med, med - lo) + 1.0;
  }
};

BulkStats stats_of(const std::vector<double>& v) {
  BulkStats s;
  s.med = median_of(v);
  s.mad = mad_of(v, s.med);
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.lo = *lo;
  s.hi = *hi;
  return s;
}

// Isolation helper over the staged bulk: range-normalized Euclidean
// distance against every bulk row.
struct BulkSpace {
  std::vector<const std::vector<double>*> cols;
  std::vector<double> lo, inv;
  size_t bulk_n = 0;  // bulk rows are a prefix of the staged columns

  explicit BulkSpace(const Staging& staging, size_t bulk_rows) {
    bulk_n = bulk_rows;
    for (const auto& c : staging.num_cols) {
      cols.push_back(&c);
      auto [mn, mx] =
          std::minmax_element(c.begin(), c.begin() + bulk_rows);
      lo.push_back(*mn);
      inv.push_back(*mx > *mn ? 1.0 / (*mx - *mn) : 0.0);
    }
  }

  double dist(std::span<const double> point, size_t bulk_row) const {
    double d2 = 0;
    for (size_t c = 0; c < cols.size(); ++c) {
      double d = (point[c] - (*cols[c])[bulk_row]) * inv[c];
      d2 += d * d;
    }
    return std::sqrt(d2);
  }

  double nearest(std::span<const double> point) const {
    double best = std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < bulk_n; ++r) best = std::min(best, dist(point, r));
    return best;
  }

  // 99.9th percentile nearest-neighbor distance of (a subsample of) the
  // bulk. The subsample keeps placement linear at benchmark sizes; it
  // can only overestimate the full-sample percentile a verifier sees,
  // and the placement headroom absorbs that.
  double isolation_threshold() const {
    size_t m = std::min<size_t>(bulk_n, 4096);
    std::vector<double> nn(m, std::numeric_limits<double>::infinity());
    std::vector<double> pt(cols.size());
    for (size_t i = 0; i < m; ++i) {
      for (size_t c = 0; c < cols.size(); ++c) pt[c] = (*cols[c])[i];
      for (size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        nn[i] = std::min(nn[i], dist(pt, j));
      }
    }
    return nearest_rank_quantile(std::move(nn), 0.999);
  }
};

// Scans uniform draws inside the bulk's marginal box (5% inset) and
// keeps the one farthest from the bulk, so the plant lands in the
// emptiest pocket the box offers. The draw budget is fixed, which keeps
// the random stream a pure function of the GeneratorSpec. Placement
// fails only when even the best draw cannot clear the isolation
// threshold with headroom.
std::vector<double> place_isolated(const BulkSpace& space, Rng& rng,
                                   double threshold) {
  size_t dims = space.cols.size();
  std::vector<double> cand(dims);
  std::vector<double> box_lo(dims), box_hi(dims);
  for (size_t c = 0; c < dims; ++c) {
    double range = space.inv[c] > 0 ? 1.0 / space.inv[c] : 0.0;
    box_lo[c] = space.lo[c] + 0.05 * range;
    box_hi[c] = space.lo[c] + 0.95 * range;
  }
  std::vector<double> best;
  double best_d = 0.0;
  for (int attempt = 0; attempt < 5000; ++attempt) {
    for (size_t c = 0; c < dims; ++c) {
      cand[c] = rng.uniform(box_lo[c], box_hi[c]);
    }
    double d = space.nearest(cand);
    if (d > best_d) {
      best_d = d;
      best = cand;
    }
  }
  if (best_d > 1.25 * threshold) return best;
  throw Error("generator failed to isolate a type III case");
}

void require_supported(const char* kind, const PlantCounts& plant,
                       bool t1, bool t2, bool t3, bool t4) {
  auto reject = [&](int count, bool ok, const char* type) {
    if (count > 0 && !ok) {
      throw std::invalid_argument(std::string(kind) + " does not plant type " +
                                  type);
    }
  };
  reject(plant.type1, t1, "I");
  reject(plant.type2, t2, "II");
  reject(plant.type3, t3, "III");
  reject(plant.type4, t4, "IV");
}

/* ---------------- Mountain: bell surface over a square -------------- */

Staging gen_mountain(size_t n, const PlantCounts& plant, Rng& bulk_rng,
                     Rng& plant_rng) {
  require_supported("mountain", plant, true, false, true, false);
  Staging st;
  st.schema.attributes = {{"x", AttrKind::Numerical},
                          {"y", AttrKind::Numerical},
                          {"z", AttrKind::Numerical}};
  st.num_cols.resize(3);
  size_t bulk_n = n - plant.total();
  for (size_t i = 0; i < bulk_n; ++i) {
    double x = bulk_rng.uniform(-3.0, 3.0);
    double y = bulk_rng.uniform(-3.0, 3.0);
    double z = 10.0 * std::exp(-(x * x + y * y) / 3.0) +
               bulk_rng.normal(0.0, 0.15);
    st.push_numeric({x, y, z}, 0);
  }

  BulkStats zs = stats_of(st.num_cols[2]);
  for (int k = 0; k < plant.type1; ++k) {
    double sign = k % 2 == 0 ? 1.0 : -1.0;
    double z = zs.med + sign * zs.extreme_offset() * (1.0 + 0.05 * k);
    st.push_numeric({plant_rng.uniform(-3.0, 3.0),
                     plant_rng.uniform(-3.0, 3.0), z},
                    1);
  }
  if (plant.type3 > 0) {
    BulkSpace space(st, bulk_n);
    double threshold = space.isolation_threshold();
    for (int k = 0; k < plant.type3; ++k) {
      auto p = place_isolated(space, plant_rng, threshold);
      st.push_numeric({p[0], p[1], p[2]}, 3);
    }
  }
  return st;
}

/* ---------------- Helix: spiral with banded colors ------------------ */

const char* const kHelixPalette[4] = {"red", "green", "blue", "orange"};

int helix_band(double z) {
  int band = static_cast<int>(std::floor(z / 7.5));
  return std::clamp(band, 0, 3);
}

Staging gen_helix(size_t n, const PlantCounts& plant, Rng& bulk_rng,
                  Rng& plant_rng) {
  require_supported("helix", plant, true, false, true, true);
  if (plant.type4 > 4) {
    throw std::invalid_argument("helix supports at most 4 type IV plants");
  }
  Staging st;
  st.schema.attributes = {{"x", AttrKind::Numerical},
                          {"y", AttrKind::Numerical},
                          {"z", AttrKind::Numerical},
                          {"color", AttrKind::Categorical}};
  st.num_cols.resize(3);
  st.cat_cols.resize(1);

  auto push = [&](double x, double y, double z, const char* color,
                  uint8_t label) {
    st.num_cols[0].push_back(x);
    st.num_cols[1].push_back(y);
    st.num_cols[2].push_back(z);
    st.cat_cols[0].push_back(color);
    st.labels.push_back(label);
  };

  size_t bulk_n = n - plant.total();
  for (size_t i = 0; i < bulk_n; ++i) {
    double t = bulk_rng.uniform(0.0, 3.0 * kTau);
    double x = std::cos(t) + bulk_rng.normal(0.0, 0.05);
    double y = std::sin(t) + bulk_rng.normal(0.0, 0.05);
    double z = t * (30.0 / (3.0 * kTau)) + bulk_rng.normal(0.0, 0.2);
    push(x, y, z, kHelixPalette[helix_band(z)], 0);
  }

  BulkStats zs = stats_of(st.num_cols[2]);
  for (int k = 0; k < plant.type1; ++k) {
    // Continues the spiral beyond its top; extreme on z alone.
    double z = zs.med + zs.extreme_offset() * (1.0 + 0.05 * k);
    double t = plant_rng.uniform(0.0, kTau);
    push(std::cos(t), std::sin(t), z, kHelixPalette[helix_band(z)], 1);
  }
  if (plant.type3 > 0) {
    BulkSpace space(st, bulk_n);
    double threshold = space.isolation_threshold();
    for (int k = 0; k < plant.type3; ++k) {
      auto p = place_isolated(space, plant_rng, threshold);
      push(p[0], p[1], p[2], kHelixPalette[helix_band(p[2])], 3);
    }
  }
  // On-pattern positions wearing a color from a far band. The z windows
  // keep each plant away from band boundaries and from its siblings, and
  // each wrong color is chosen so its band stays out of reach of the
  // plant's neighborhood even one full turn up or down the spiral, where
  // phase-aligned cases sit only a z-period away.
  const double kWinLo[4] = {2.5, 24.5, 4.1, 26.1};
  const char* const kWrongColor[4] = {"blue", "red", "orange", "green"};
  for (int k = 0; k < plant.type4; ++k) {
    double z = plant_rng.uniform(kWinLo[k], kWinLo[k] + 0.9);
    double t = z * (3.0 * kTau) / 30.0;
    double x = std::cos(t) + plant_rng.normal(0.0, 0.05);
    double y = std::sin(t) + plant_rng.normal(0.0, 0.05);
    push(x, y, z, kWrongColor[k], 4);
  }
  return st;
}

/* ---------------- TimeSeries: trajectory over time ------------------ */

Staging gen_timeseries(size_t n, const PlantCounts& plant, Rng& bulk_rng,
                       Rng& plant_rng) {
  require_supported("timeseries", plant, true, false, true, false);
  Staging st;
  st.schema.attributes = {{"t", AttrKind::Numerical},
                          {"v", AttrKind::Numerical}};
  st.num_cols.resize(2);

  // Reserve interior time slots for the plants so each keeps a time
  // value inside the bulk's range.
  size_t total_plants = static_cast<size_t>(plant.total());
  std::vector<size_t> slots;
  while (slots.size() < total_plants) {
    size_t cand = static_cast<size_t>(
        plant_rng.below(static_cast<uint64_t>(n * 8 / 10)) + n / 10);
    if (std::find(slots.begin(), slots.end(), cand) == slots.end()) {
      slots.push_back(cand);
    }
  }

  double period = static_cast<double>(n) / 3.0;
  auto trajectory = [&](double t) {
    return 8.0 * std::sin(kTau * t / period) + (4.0 / n) * t;
  };
  size_t bulk_n = n - total_plants;
  (void)bulk_n;
  for (size_t i = 0; i < n; ++i) {
    if (std::find(slots.begin(), slots.end(), i) != slots.end()) continue;
    double t = static_cast<double>(i);
    st.push_numeric({t, trajectory(t) + bulk_rng.normal(0.0, 0.25)}, 0);
  }

  BulkStats vs = stats_of(st.num_cols[1]);
  size_t slot_i = 0;
  for (int k = 0; k < plant.type1; ++k) {
    double sign = k % 2 == 0 ? 1.0 : -1.0;
    double t = static_cast<double>(slots[slot_i++]);
    st.push_numeric({t, vs.med + sign * vs.extreme_offset() * (1.0 + 0.05 * k)},
                    1);
  }
  if (plant.type3 > 0) {
    BulkSpace bulk_space(st, n - total_plants);
    double threshold = bulk_space.isolation_threshold();
    for (int k = 0; k < plant.type3; ++k) {
      // The time slot is pinned, so only the value axis can open a gap.
      // The trajectory sweeps the whole value range within half a
      // period, capping the reachable clearance; the farthest draw wins
      // as long as it clears the isolation threshold with headroom.
      double t = static_cast<double>(slots[slot_i++]);
      double span = vs.hi - vs.lo;
      double best_v = 0.0;
      double best_d = 0.0;
      for (int attempt = 0; attempt < 5000; ++attempt) {
        double v = plant_rng.uniform(vs.lo + 0.05 * span, vs.hi - 0.05 * span);
        double d = bulk_space.nearest(std::array<double, 2>{t, v});
        if (d > best_d) {
          best_d = d;
          best_v = v;
        }
      }
      if (best_d <= 1.25 * threshold) {
        throw Error("generator failed to isolate a type III case");
      }
      st.push_numeric({t, best_v}, 3);
    }
  }
  return st;
}

/* ---------------- NoisyMix: patterned blobs ------------------------- */

struct ComboPair {
  const char* color;
  const char* size;
};

constexpr double kCenters[5][3] = {
    {2, 2, 2}, {8, 8, 8}, {2, 8, 5}, {8, 2, 5}, {5, 5, 8}};
constexpr double kClusterWeight[5] = {0.25, 0.25, 0.20, 0.15, 0.15};
// Two (color, size) combos per cluster; every combo is frequent somewhere.
constexpr ComboPair kPairs[5][2] = {
    {{"red", "big"}, {"blue", "small"}},
    {{"red", "small"}, {"yellow", "big"}},
    {{"purple", "big"}, {"blue", "small"}},
    {{"yellow", "small"}, {"purple", "big"}},
    {{"blue", "big"}, {"red", "small"}},
};
// Type IV sites: a cluster plus a combo common globally yet absent from
// that cluster's pattern. The first entry pairs two locally common
// values whose combination never occurs there (higher-order).
struct IvSite {
  int cluster;
  const char* color;
  const char* size;
};
constexpr IvSite kIvSites[8] = {
    {0, "red", "small"},  {0, "yellow", "big"}, {1, "purple", "big"},
    {2, "red", "big"},    {3, "blue", "small"}, {4, "yellow", "big"},
    {1, "blue", "small"}, {2, "red", "small"},
};
const char* const kRareColors[4] = {"green", "white", "black", "cyan"};

Staging gen_noisymix(size_t n, const PlantCounts& plant, Rng& bulk_rng,
                     Rng& plant_rng) {
  require_supported("noisymix", plant, false, true, false, true);
  if (plant.type4 > 8) {
    throw std::invalid_argument("noisymix supports at most 8 type IV plants");
  }
  if (plant.type2 > 8) {
    throw std::invalid_argument("noisymix supports at most 8 type II plants");
  }
  Staging st;
  st.schema.attributes = {{"x", AttrKind::Numerical},
                          {"y", AttrKind::Numerical},
                          {"z", AttrKind::Numerical},
                          {"color", AttrKind::Categorical},
                          {"size", AttrKind::Categorical}};
  st.num_cols.resize(3);
  st.cat_cols.resize(2);

  auto offset = [](Rng& rng, double sigma, double* out) {
    // Norm-truncated at 2.5 sigma, which keeps blobs out of each
    // other's cores and makes the categorical pattern analysis exact.
    while (true) {
      double a = rng.normal(), b = rng.normal(), c = rng.normal();
      if (a * a + b * b + c * c <= 2.5 * 2.5) {
        out[0] = a * sigma;
        out[1] = b * sigma;
        out[2] = c * sigma;
        return;
      }
    }
  };

  auto push = [&](int cluster, Rng& rng, double sigma, const char* color,
                  const char* size, uint8_t label) {
    double off[3];
    offset(rng, sigma, off);
    st.num_cols[0].push_back(kCenters[cluster][0] + off[0]);
    st.num_cols[1].push_back(kCenters[cluster][1] + off[1]);
    st.num_cols[2].push_back(kCenters[cluster][2] + off[2]);
    st.cat_cols[0].push_back(color);
    st.cat_cols[1].push_back(size);
    st.labels.push_back(label);
  };

  size_t bulk_n = n - plant.total();
  for (size_t i = 0; i < bulk_n; ++i) {
    double u = bulk_rng.uniform();
    int cluster = 4;
    double acc = 0;
    for (int k = 0; k < 5; ++k) {
      acc += kClusterWeight[k];
      if (u < acc) {
        cluster = k;
        break;
      }
    }
    double sigma = bulk_rng.uniform() < 0.85 ? 0.55 : 1.1;
    const ComboPair& pair = kPairs[cluster][bulk_rng.uniform() < 0.5 ? 0 : 1];
    push(cluster, bulk_rng, sigma, pair.color, pair.size, 0);
  }

  for (int k = 0; k < plant.type2; ++k) {
    int cluster = k % 5;
    push(cluster, plant_rng, 0.3, kRareColors[k / 2],
         kPairs[cluster][0].size, 2);
  }
  for (int k = 0; k < plant.type4; ++k) {
    const IvSite& site = kIvSites[k];
    push(site.cluster, plant_rng, 0.3, site.color, site.size, 4);
  }
  return st;
}

}  // namespace

size_t default_case_count(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Mountain:
      return 943;
    case GeneratorKind::Helix:
      return 1410;
    case GeneratorKind::TimeSeries:
      return 398;
    case GeneratorKind::NoisyMix:
      return 3867;
  }
  throw std::invalid_argument("unknown generator kind");
}

PlantCounts default_plant(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Mountain:
      return {.type1 = 2, .type2 = 0, .type3 = 1, .type4 = 0};
    case GeneratorKind::Helix:
      return {.type1 = 1, .type2 = 0, .type3 = 1, .type4 = 2};
    case GeneratorKind::TimeSeries:
      return {.type1 = 1, .type2 = 0, .type3 = 1, .type4 = 0};
    case GeneratorKind::NoisyMix:
      return {.type1 = 0, .type2 = 1, .type3 = 0, .type4 = 3};
  }
  throw std::invalid_argument("unknown generator kind");
}

const char* generator_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Mountain:
      return "mountain";
    case GeneratorKind::Helix:
      return "helix";
    case GeneratorKind::TimeSeries:
      return "timeseries";
    case GeneratorKind::NoisyMix:
      return "noisymix";
  }
  throw std::invalid_argument("unknown generator kind");
}

std::optional<GeneratorKind> generator_from_name(const std::string& name) {
  if (name == "mountain") return GeneratorKind::Mountain;
  if (name == "helix") return GeneratorKind::Helix;
  if (name == "timeseries") return GeneratorKind::TimeSeries;
  if (name == "noisymix") return GeneratorKind::NoisyMix;
  return std::nullopt;
}

LabeledDataset generate(const GeneratorSpec& spec) {
  size_t n = spec.n == 0 ? default_case_count(spec.kind) : spec.n;
  PlantCounts plant = spec.plant.value_or(default_plant(spec.kind));
  if (n < 100) {
    throw std::invalid_argument("generator needs at least 100 cases");
  }
  if (plant.type1 < 0 || plant.type2 < 0 || plant.type3 < 0 ||
      plant.type4 < 0) {
    throw std::invalid_argument("plant counts must be non-negative");
  }
  if (static_cast<size_t>(plant.total()) > n / 10) {
    throw std::invalid_argument("plant counts exceed a tenth of the cases");
  }

  uint64_t base = stream_seed(spec.seed, static_cast<uint64_t>(spec.kind));
  Rng bulk_rng(stream_seed(base, 0));
  Rng plant_rng(stream_seed(base, 1));
  Rng shuffle_rng(stream_seed(base, 2));

  Staging st;
  switch (spec.kind) {
    case GeneratorKind::Mountain:
      st = gen_mountain(n, plant, bulk_rng, plant_rng);
      break;
    case GeneratorKind::Helix:
      st = gen_helix(n, plant, bulk_rng, plant_rng);
      break;
    case GeneratorKind::TimeSeries:
      st = gen_timeseries(n, plant, bulk_rng, plant_rng);
      break;
    case GeneratorKind::NoisyMix:
      st = gen_noisymix(n, plant, bulk_rng, plant_rng);
      break;
  }
  return finalize(std::move(st), shuffle_rng);
}

/* ---------------- verification --------------------------------------- */

namespace {

// Range-normalized distances over the numerical attributes. A missing
// cell on either side contributes a full range width.
struct VerifySpace {
  const Dataset& data;
  std::vector<size_t> cols;
  std::vector<double> lo, inv;

  VerifySpace(const Dataset& d, const std::vector<uint32_t>& bulk) : data(d) {
    for (size_t col = 0; col < d.cols(); ++col) {
      if (d.schema().attributes[col].kind != AttrKind::Numerical) continue;
      const NumericColumn& c = d.numeric_column(col);
      bool seen = false;
      double mn = 0, mx = 0;
      for (uint32_t row : bulk) {
        if (c.missing[row]) continue;
        double v = c.values[row];
        if (!seen) {
          mn = mx = v;
          seen = true;
        } else {
          mn = std::min(mn, v);
          mx = std::max(mx, v);
        }
      }
      cols.push_back(col);
      lo.push_back(mn);
      inv.push_back(seen && mx > mn ? 1.0 / (mx - mn) : 0.0);
    }
  }

  double dist(size_t a, size_t b) const {
    double d2 = 0;
    for (size_t k = 0; k < cols.size(); ++k) {
      const NumericColumn& c = data.numeric_column(cols[k]);
      if (c.missing[a] || c.missing[b]) {
        d2 += 1.0;
        continue;
      }
      double d = (c.values[a] - c.values[b]) * inv[k];
      d2 += d * d;
    }
    return std::sqrt(d2);
  }
};

bool combo_equal(const Dataset& d, const std::vector<size_t>& cat_cols,
                 size_t a, size_t b) {
  for (size_t col : cat_cols) {
    const CategoricalColumn& c = d.categorical_column(col);
    if (c.missing[a] != c.missing[b]) return false;
    if (!c.missing[a] && c.codes[a] != c.codes[b]) return false;
  }
  return true;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

PlantReport verify_plant(const Dataset& data, const LabelVector& labels) {
  if (labels.size() != data.rows()) {
    throw std::invalid_argument("labels do not cover the dataset");
  }
  for (uint8_t l : labels) {
    if (l > 4) throw std::invalid_argument("labels must be 0..4");
  }

  std::vector<uint32_t> bulk;
  std::vector<size_t> planted;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) {
      bulk.push_back(static_cast<uint32_t>(i));
    } else {
      planted.push_back(i);
    }
  }
  PlantReport report;
  if (planted.empty()) return report;
  if (bulk.empty()) {
    throw std::invalid_argument("no bulk cases to verify against");
  }

  VerifySpace space(data, bulk);
  std::vector<size_t> num_cols, cat_cols;
  for (size_t col = 0; col < data.cols(); ++col) {
    (data.schema().attributes[col].kind == AttrKind::Numerical ? num_cols
                                                               : cat_cols)
        .push_back(col);
  }

  // Bulk nearest-neighbor percentile, needed only for type III.
  double iso_threshold = 0.0;
  if (std::any_of(planted.begin(), planted.end(),
                  [&](size_t i) { return labels[i] == 3; })) {
    std::vector<double> nn(bulk.size(),
                           std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < bulk.size(); ++i) {
      for (size_t j = i + 1; j < bulk.size(); ++j) {
        double d = space.dist(bulk[i], bulk[j]);
        nn[i] = std::min(nn[i], d);
        nn[j] = std::min(nn[j], d);
      }
    }
    iso_threshold = nearest_rank_quantile(std::move(nn), 0.999);
  }

  for (size_t id : planted) {
    PlantCheck check;
    check.case_id = id;
    check.type = labels[id];
    switch (labels[id]) {
      case 1: {
        check.detail = "no attribute beyond 3*MAD";
        for (size_t col : num_cols) {
          const NumericColumn& c = data.numeric_column(col);
          if (c.missing[id]) continue;
          std::vector<double> vals;
          vals.reserve(bulk.size());
          for (uint32_t row : bulk) {
            if (!c.missing[row]) vals.push_back(c.values[row]);
          }
          if (vals.empty()) continue;
          double med = median_of(vals);
          double mad = mad_of(vals, med);
          double dev = std::abs(c.values[id] - med);
          if (dev > 3.0 * mad) {
            check.pass = true;
            check.detail = data.schema().attributes[col].name + ": |" +
                           fmt(c.values[id]) + " - " + fmt(med) + "| > 3*" +
                           fmt(mad);
            break;
          }
        }
        break;
      }
      case 2: {
        check.detail = "no categorical value or combination with <= 2 cases";
        for (size_t col : cat_cols) {
          const CategoricalColumn& c = data.categorical_column(col);
          if (c.missing[id]) continue;
          size_t count = 0;
          for (size_t row = 0; row < data.rows(); ++row) {
            if (!c.missing[row] && c.codes[row] == c.codes[id]) ++count;
          }
          if (count <= 2) {
            check.pass = true;
            check.detail = data.schema().attributes[col].name + "=" +
                           c.dictionary[c.codes[id]] + " occurs " +
                           std::to_string(count) + "x";
            break;
          }
        }
        if (!check.pass && !cat_cols.empty()) {
          size_t count = 0;
          for (size_t row = 0; row < data.rows(); ++row) {
            if (combo_equal(data, cat_cols, id, row)) ++count;
          }
          if (count <= 2) {
            check.pass = true;
            check.detail =
                "categorical combination occurs " + std::to_string(count) + "x";
          }
        }
        break;
      }
      case 3: {
        bool inside = true;
        for (size_t k = 0; k < space.cols.size(); ++k) {
          const NumericColumn& c = data.numeric_column(space.cols[k]);
          if (c.missing[id]) {
            inside = false;
            break;
          }
          double range = space.inv[k] > 0 ? 1.0 / space.inv[k] : 0.0;
          if (c.values[id] < space.lo[k] || c.values[id] > space.lo[k] + range) {
            inside = false;
            break;
          }
        }
        if (!inside) {
          check.detail = "outside a marginal range";
          break;
        }
        double nn = std::numeric_limits<double>::infinity();
        for (uint32_t row : bulk) nn = std::min(nn, space.dist(id, row));
        check.pass = nn > iso_threshold;
        check.detail = "nearest bulk " + fmt(nn) +
                       (check.pass ? " > " : " <= ") + fmt(iso_threshold);
        break;
      }
      case 4: {
        if (cat_cols.empty()) {
          check.detail = "no categorical attributes";
          break;
        }
        size_t global = 0;
        for (size_t row = 0; row < data.rows(); ++row) {
          if (combo_equal(data, cat_cols, id, row)) ++global;
        }
        size_t floor_count = std::max<size_t>(
            10, static_cast<size_t>(
                    std::ceil(0.01 * static_cast<double>(data.rows()))));
        if (global < floor_count) {
          check.detail = "combination occurs only " + std::to_string(global) +
                         "x globally (needs " + std::to_string(floor_count) +
                         ")";
          break;
        }
        size_t k = std::min<size_t>(25, data.rows() - 1);
        std::vector<std::pair<double, uint32_t>> dists;
        dists.reserve(data.rows() - 1);
        for (size_t row = 0; row < data.rows(); ++row) {
          if (row == id) continue;
          dists.emplace_back(space.dist(id, row),
                             static_cast<uint32_t>(row));
        }
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        size_t shared = 0;
        for (size_t i = 0; i < k; ++i) {
          if (combo_equal(data, cat_cols, id, dists[i].second)) ++shared;
        }
        check.pass = shared == 0;
        check.detail = "combination occurs " + std::to_string(global) +
                       "x globally, " + std::to_string(shared) + "x among " +
                       std::to_string(k) + " nearest neighbors";
        break;
      }
      default:
        check.detail = "unknown type";
        break;
    }
    report.all_pass = report.all_pass && check.pass;
    report.checks.push_back(std::move(check));
  }
  return report;
}

/* ---------------- labels CSV ----------------------------------------- */

static const char* const kLabelNames[5] = {"normal", "I", "II", "III", "IV"};

std::string labels_to_csv(const LabelVector& labels) {
  std::string out = "case_id,label\n";
  for (size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i);
    out.push_back(',');
    out += kLabelNames[labels[i]];
    out.push_back('\n');
  }
  return out;
}

LabelVector labels_from_csv(const std::string& text) {
  CsvReader reader(text);
  std::vector<std::string> record;
  size_t line = 0;
  if (!reader.next(record, line) || record.size() != 2 ||
      record[0] != "case_id" || record[1] != "label") {
    throw ParseError("labels file must start with a case_id,label header");
  }
  std::vector<std::pair<size_t, uint8_t>> entries;
  while (reader.next(record, line)) {
    if (record.size() != 2) {
      throw ParseError("line " + std::to_string(line) +
                       ": expected 2 fields, got " +
                       std::to_string(record.size()));
    }
    size_t id = 0;
    const char* begin = record[0].data();
    const char* end = begin + record[0].size();
    auto [ptr, ec] = std::from_chars(begin, end, id);
    if (ec != std::errc() || ptr != end) {
      throw ParseError("line " + std::to_string(line) + ": bad case id '" +
                       record[0] + "'");
    }
    uint8_t value = 255;
    for (uint8_t v = 0; v < 5; ++v) {
      if (record[1] == kLabelNames[v]) {
        value = v;
        break;
      }
    }
    if (value == 255) {
      throw ParseError("line " + std::to_string(line) + ": unknown label '" +
                       record[1] + "'");
    }
    entries.emplace_back(id, value);
  }
  LabelVector labels(entries.size(), 255);
  for (const auto& [id, value] : entries) {
    if (id >= labels.size() || labels[id] != 255) {
      throw ParseError("case ids must cover 0.." +
                       std::to_string(labels.size() - 1) + " exactly");
    }
    labels[id] = value;
  }
  return labels;
}

void write_labels(const LabelVector& labels, const std::string& path) {
  write_file(path, labels_to_csv(labels));
}

LabelVector load_labels(const std::string& path) {
  return labels_from_csv(read_file(path));
}

}  // namespace secoda
