// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gcomp/compressors.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gcomp {

namespace {

// ---- payload encoding -------------------------------------------------

struct PayloadWriter {
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void i8(std::int8_t v) { bytes.push_back(static_cast<std::uint8_t>(v)); }
  void u16(std::uint16_t v) {
    bytes.push_back(v & 0xff);
    bytes.push_back((v >> 8) & 0xff);
  }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back((v >> (8 * i)) & 0xff);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) bytes.push_back((bits >> (8 * i)) & 0xff);
  }
};

struct PayloadReader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  std::uint8_t u8() { return bytes.at(pos++); }
  std::int8_t i8() { return static_cast<std::int8_t>(u8()); }
  std::uint16_t u16() {
    std::uint16_t v = bytes.at(pos) | (std::uint16_t(bytes.at(pos + 1)) << 8);
    pos += 2;
    return v;
  }
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes.at(pos + i)) << (8 * i);
    pos += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(bytes.at(pos + i)) << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

// ---- grid helpers ------------------------------------------------------

// Single source of truth for grid values; compress and decode both go
// through these so the payload round trip is bit-exact.
double pow_base(double base, int e) {
  if (base == 2.0) return std::ldexp(1.0, e);
  return std::pow(base, static_cast<double>(e));
}

double pow10i(int e) { return std::pow(10.0, static_cast<double>(e)); }

double nf_value(int mant_tenths, int q) {
  return (static_cast<double>(mant_tenths) / 10.0) * pow10i(q);
}

// Normal-form rounding onto the leading-decimal grid: 2,3,...,10 times 10^q
// away from leading digit 1, and 1.0,1.1,...,1.5,2.0 under it. Mantissas are
// stored in tenths (10..100).
struct NfCase {
  int lo_mant = 0;  // mantissa tenths of the two bracketing grid points
  int hi_mant = 0;
  int q = 0;
  double p_hi = 0.0;  // probability of rounding up
};

NfCase nf_case(double t) {
  NfCase c;
  c.q = static_cast<int>(std::floor(std::log10(t)));
  while (pow10i(c.q + 1) <= t) ++c.q;
  while (pow10i(c.q) > t) --c.q;
  const double m = t / pow10i(c.q);  // in [1, 10)
  const int x0 = std::clamp(static_cast<int>(m), 1, 9);
  if (x0 != 1) {
    c.p_hi = m - x0;
    c.lo_mant = x0 * 10;
    c.hi_mant = (x0 + 1) * 10;
    return c;
  }
  const int x1 = std::clamp(static_cast<int>(m * 10.0) - 10, 0, 9);
  if (x1 <= 4) {
    c.p_hi = m * 10.0 - (10 + x1);
    c.lo_mant = 10 + x1;
    c.hi_mant = 11 + x1;
  } else {
    c.p_hi = 2.0 * m - 3.0;
    c.lo_mant = 15;
    c.hi_mant = 20;
  }
  return c;
}

// Exponent e with base^e <= t <= base^(e+1) for t > 0, before clamping.
int floor_log_base(double t, double base) {
  int e = static_cast<int>(std::floor(std::log(t) / std::log(base)));
  while (pow_base(base, e + 1) < t) ++e;
  while (pow_base(base, e) > t) --e;
  return e;
}

int ceil_log2_int(std::uint64_t n) {
  int b = 0;
  while ((std::uint64_t{1} << b) < n) ++b;
  return b;
}

std::int8_t sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// ---- shared operator cores ---------------------------------------------

struct SparseResult {
  double gain = 1.0;
  std::vector<std::uint32_t> indices;  // ascending
};

CompressedMessage finish_sparse(const Vec& x, const CompressorSpec& spec,
                                const SparseResult& sr) {
  const auto d = static_cast<std::uint32_t>(x.size());
  CompressedMessage msg;
  msg.decoded = zeros(x.size());
  PayloadWriter w;
  w.u8(static_cast<std::uint8_t>(spec.kind));
  w.u32(d);
  w.f64(spec.scale);
  w.f64(sr.gain);
  w.u32(static_cast<std::uint32_t>(sr.indices.size()));
  for (std::uint32_t i : sr.indices) {
    msg.decoded[i] = spec.scale * sr.gain * x[i];
    w.u32(i);
    w.f64(x[i]);
  }
  msg.payload = std::move(w.bytes);
  msg.bit_cost = bit_cost_model(spec, static_cast<int>(x.size()),
                                static_cast<int>(sr.indices.size()));
  return msg;
}

std::vector<std::uint32_t> top_k_indices(const Vec& x, int k) {
  std::vector<std::uint32_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Ties in magnitude break toward the lower index.
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double fa = std::fabs(x[a]), fb = std::fabs(x[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Stochastic rounding of |t| onto the exponential grid base^e; returns the
// chosen exponent or INT_MIN for underflow-to-zero.
constexpr int kZeroExp = INT_MIN;

int round_exponent_unbiased(double t, double base, Rng& rng) {
  const int emax = rounding_exponent_limit(base);
  if (t < pow_base(base, -emax)) return kZeroExp;
  if (t >= pow_base(base, emax)) return emax;
  int e = floor_log_base(t, base);
  const double lo = pow_base(base, e), hi = pow_base(base, e + 1);
  const double p_up = (t - lo) / (hi - lo);
  return rng.uniform() < p_up ? e + 1 : e;
}

int round_exponent_nearest(double t, double base) {
  const int emax = rounding_exponent_limit(base);
  if (t < pow_base(base, -emax)) return kZeroExp;
  if (t >= pow_base(base, emax)) return emax;
  int e = floor_log_base(t, base);
  const double lo = pow_base(base, e), hi = pow_base(base, e + 1);
  return (t - lo) <= (hi - t) ? e : e + 1;
}

CompressedMessage rounding_message(const Vec& x, const CompressorSpec& spec,
                                   bool biased, Rng* rng) {
  const auto d = static_cast<std::uint32_t>(x.size());
  CompressedMessage msg;
  msg.decoded = zeros(x.size());
  PayloadWriter w;
  w.u8(static_cast<std::uint8_t>(spec.kind));
  w.u32(d);
  w.f64(spec.scale);
  w.f64(spec.base);
  for (std::uint32_t i = 0; i < d; ++i) {
    const double t = std::fabs(x[i]);
    std::int8_t s = sign_of(x[i]);
    int e = kZeroExp;
    if (s != 0) {
      e = biased ? round_exponent_nearest(t, spec.base)
                 : round_exponent_unbiased(t, spec.base, *rng);
    }
    if (e == kZeroExp) {
      w.i8(0);
      w.i32(0);
    } else {
      msg.decoded[i] = spec.scale * s * pow_base(spec.base, e);
      w.i8(s);
      w.i32(e);
    }
  }
  msg.payload = std::move(w.bytes);
  msg.bit_cost = bit_cost_model(spec, static_cast<int>(d), static_cast<int>(d));
  return msg;
}

// Level index u in [0, s-1] for ratio r in (0, 1], or -1 for rounded-to-zero.
// Levels are base^0 > base^-1 > ... > base^(1-s); ratios below the lowest
// level split stochastically between 0 and base^(1-s).
int dither_level(double r, double base, int s, Rng& rng) {
  const double lowest = pow_base(base, 1 - s);
  if (r < lowest) {
    return rng.uniform() < r / lowest ? s - 1 : -1;
  }
  if (r >= 1.0) return 0;
  int u = static_cast<int>(std::floor(-std::log(r) / std::log(base)));
  if (u < 0) u = 0;
  while (pow_base(base, -u) < r) --u;
  while (u + 1 < s && pow_base(base, -u - 1) > r) ++u;
  if (u >= s - 1) return s - 1;
  const double hi = pow_base(base, -u), lo = pow_base(base, -u - 1);
  const double p_hi = (r - lo) / (hi - lo);
  return rng.uniform() < p_hi ? u : u + 1;
}

}  // namespace

// ---- spec --------------------------------------------------------------

void CompressorSpec::validate(int dim) const {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  switch (kind) {
    case Kind::RandK:
    case Kind::TopK:
    case Kind::TopKPlusDithering:
      if (k < 1 || k > dim) {
        throw std::invalid_argument("k out of range: k=" + std::to_string(k) +
                                    ", dim=" + std::to_string(dim));
      }
      break;
    case Kind::BiasedRandomSparse:
      if (static_cast<int>(probs.size()) != dim) {
        throw std::invalid_argument("probability vector length must equal dim");
      }
      for (double p : probs) {
        if (!(p > 0.0) || p > 1.0) {
          throw std::invalid_argument("inclusion probabilities must lie in (0,1]");
        }
      }
      break;
    default:
      break;
  }
  switch (kind) {
    case Kind::GeneralUnbiasedRounding:
    case Kind::GeneralBiasedRounding:
    case Kind::GeneralExpDithering:
    case Kind::TopKPlusDithering:
      if (!(base > 1.0)) throw std::invalid_argument("base must be > 1");
      break;
    default:
      break;
  }
  switch (kind) {
    case Kind::GeneralExpDithering:
    case Kind::NaturalDithering:
    case Kind::TopKPlusDithering:
      if (levels < 1 || levels > 16384) {
        throw std::invalid_argument("levels must be in [1, 16384]");
      }
      if (!(norm_order >= 1.0)) {
        throw std::invalid_argument("norm order must be >= 1 (or inf)");
      }
      break;
    default:
      break;
  }
}

bool CompressorSpec::deterministic() const {
  switch (kind) {
    case Kind::Identity:
    case Kind::TopK:
    case Kind::GeneralBiasedRounding:
      return true;
    default:
      return false;
  }
}

bool CompressorSpec::unbiased() const {
  if (scale != 1.0) return false;
  switch (kind) {
    case Kind::Identity:
    case Kind::RandK:
    case Kind::GeneralUnbiasedRounding:
    case Kind::NaturalCompression:
    case Kind::GeneralExpDithering:
    case Kind::NaturalDithering:
    case Kind::NormalForm:
      return true;
    default:
      return false;
  }
}

std::string CompressorSpec::name() const {
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::RandK: return "rand_k";
    case Kind::BiasedRandomSparse: return "biased_random_sparse";
    case Kind::AdaptiveRandomSparse: return "adaptive_random_sparse";
    case Kind::TopK: return "top_k";
    case Kind::GeneralUnbiasedRounding: return "general_unbiased_rounding";
    case Kind::GeneralBiasedRounding: return "general_biased_rounding";
    case Kind::NaturalCompression: return "natural_compression";
    case Kind::GeneralExpDithering: return "general_exp_dithering";
    case Kind::NaturalDithering: return "natural_dithering";
    case Kind::TopKPlusDithering: return "topk_plus_dithering";
    case Kind::NormalForm: return "normal_form";
  }
  return "unknown";
}

Config CompressorSpec::to_config() const {
  Config cfg;
  cfg.set("kind", name());
  std::ostringstream num;
  num.precision(17);
  switch (kind) {
    case Kind::RandK:
    case Kind::TopK:
      cfg.set("k", std::to_string(k));
      break;
    case Kind::TopKPlusDithering:
      cfg.set("k", std::to_string(k));
      [[fallthrough]];
    case Kind::GeneralExpDithering:
    case Kind::NaturalDithering: {
      cfg.set("levels", std::to_string(levels));
      std::ostringstream p;
      if (std::isinf(norm_order)) {
        p << "inf";
      } else {
        p.precision(17);
        p << norm_order;
      }
      cfg.set("norm_order", p.str());
      break;
    }
    case Kind::BiasedRandomSparse: {
      std::ostringstream ps;
      ps.precision(17);
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (i) ps << ",";
        ps << probs[i];
      }
      cfg.set("probs", ps.str());
      break;
    }
    default:
      break;
  }
  if (kind == Kind::GeneralUnbiasedRounding || kind == Kind::GeneralBiasedRounding ||
      kind == Kind::GeneralExpDithering || kind == Kind::TopKPlusDithering) {
    num << base;
    cfg.set("base", num.str());
  }
  if (scale != 1.0) {
    std::ostringstream sc;
    sc.precision(17);
    sc << scale;
    cfg.set("scale", sc.str());
  }
  return cfg;
}

CompressorSpec CompressorSpec::from_config(const Config& cfg) {
  CompressorSpec spec;
  const std::string kind = cfg.get_str("kind");
  if (kind == "identity") spec.kind = Kind::Identity;
  else if (kind == "rand_k") spec.kind = Kind::RandK;
  else if (kind == "biased_random_sparse") spec.kind = Kind::BiasedRandomSparse;
  else if (kind == "adaptive_random_sparse") spec.kind = Kind::AdaptiveRandomSparse;
  else if (kind == "top_k") spec.kind = Kind::TopK;
  else if (kind == "general_unbiased_rounding") spec.kind = Kind::GeneralUnbiasedRounding;
  else if (kind == "general_biased_rounding") spec.kind = Kind::GeneralBiasedRounding;
  else if (kind == "natural_compression") spec.kind = Kind::NaturalCompression;
  else if (kind == "general_exp_dithering") spec.kind = Kind::GeneralExpDithering;
  else if (kind == "natural_dithering") spec.kind = Kind::NaturalDithering;
  else if (kind == "topk_plus_dithering") spec.kind = Kind::TopKPlusDithering;
  else if (kind == "normal_form") spec.kind = Kind::NormalForm;
  else throw ConfigError("unknown compressor kind: " + kind);

  spec.k = static_cast<int>(cfg.get_long("k", 1));
  spec.base = cfg.get_double("base", 2.0);
  spec.levels = static_cast<int>(cfg.get_long("levels", 1));
  spec.norm_order = cfg.get_double("norm_order", 2.0);
  spec.scale = cfg.get_double("scale", 1.0);
  if (cfg.has("probs")) {
    std::istringstream ps(cfg.get_str("probs"));
    std::string tok;
    while (std::getline(ps, tok, ',')) spec.probs.push_back(std::stod(tok));
  }
  return spec;
}

// ---- parameters of the grids -------------------------------------------

int rounding_exponent_limit(double base) {
  if (base == 2.0) return 127;
  const int e = static_cast<int>(std::floor(127.0 * std::log(2.0) / std::log(base)));
  return std::max(1, e);
}

double unbiased_rounding_second_moment(double t, double base) {
  t = std::fabs(t);
  if (t == 0.0) return 0.0;
  const int emax = rounding_exponent_limit(base);
  if (t < pow_base(base, -emax)) return 0.0;
  if (t >= pow_base(base, emax)) {
    const double v = pow_base(base, emax);
    return v * v;
  }
  const int e = floor_log_base(t, base);
  const double lo = pow_base(base, e), hi = pow_base(base, e + 1);
  // E[C(t)^2] = (lo + hi) t - lo hi for the two-outcome rounding.
  return (lo + hi) * t - lo * hi;
}

double normal_form_second_moment(double t) {
  t = std::fabs(t);
  if (t == 0.0) return 0.0;
  const NfCase c = nf_case(t);
  const double lo = nf_value(c.lo_mant, c.q);
  const double hi = nf_value(c.hi_mant, c.q);
  return (1.0 - c.p_hi) * lo * lo + c.p_hi * hi * hi;
}

double dithering_zeta(double base, int levels, double norm_order, int dim) {
  const double r = std::min(norm_order, 2.0);
  const double head = 0.25 * (base + 1.0 / base + 2.0);
  const double tail = std::pow(static_cast<double>(dim), 1.0 / r) *
                      std::pow(base, 1.0 - levels);
  return head + tail * std::min(1.0, tail);
}

std::uint64_t bit_cost_model(const CompressorSpec& spec, int dim, int kept) {
  const std::uint64_t d = static_cast<std::uint64_t>(dim);
  const std::uint64_t idx_bits = ceil_log2_int(d);
  const std::uint64_t lvl_bits = 1 + ceil_log2_int(static_cast<std::uint64_t>(spec.levels));
  switch (spec.kind) {
    case Kind::Identity:
      return 32 * d;
    case Kind::RandK:
    case Kind::BiasedRandomSparse:
    case Kind::AdaptiveRandomSparse:
    case Kind::TopK:
      return static_cast<std::uint64_t>(kept) * (32 + idx_bits);
    case Kind::GeneralUnbiasedRounding:
    case Kind::GeneralBiasedRounding:
    case Kind::NaturalCompression: {
      const std::uint64_t range =
          2 * static_cast<std::uint64_t>(rounding_exponent_limit(spec.base)) + 2;
      return d * (1 + ceil_log2_int(range));
    }
    case Kind::GeneralExpDithering:
    case Kind::NaturalDithering:
      return 32 + d * lvl_bits;
    case Kind::TopKPlusDithering:
      return 32 + static_cast<std::uint64_t>(spec.k) * (idx_bits + lvl_bits);
    case Kind::NormalForm:
      return 12 * d;
  }
  return 0;
}

// ---- operators -----------------------------------------------------------

CompressedMessage identity(const Vec& x) {
  CompressorSpec spec;
  spec.kind = Kind::Identity;
  Rng unused(0);
  return compress(spec, x, unused);
}

CompressedMessage rand_k(const Vec& x, int k, Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::RandK;
  spec.k = k;
  return compress(spec, x, rng);
}

CompressedMessage biased_random_sparse(const Vec& x, const std::vector<double>& probs,
                                       Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::BiasedRandomSparse;
  spec.probs = probs;
  return compress(spec, x, rng);
}

CompressedMessage adaptive_random_sparse(const Vec& x, Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::AdaptiveRandomSparse;
  return compress(spec, x, rng);
}

CompressedMessage top_k(const Vec& x, int k) {
  CompressorSpec spec;
  spec.kind = Kind::TopK;
  spec.k = k;
  Rng unused(0);
  return compress(spec, x, unused);
}

CompressedMessage general_unbiased_rounding(const Vec& x, double base, Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::GeneralUnbiasedRounding;
  spec.base = base;
  return compress(spec, x, rng);
}

CompressedMessage general_biased_rounding(const Vec& x, double base) {
  CompressorSpec spec;
  spec.kind = Kind::GeneralBiasedRounding;
  spec.base = base;
  Rng unused(0);
  return compress(spec, x, unused);
}

CompressedMessage natural_compression(const Vec& x, Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::NaturalCompression;
  spec.base = 2.0;
  return compress(spec, x, rng);
}

CompressedMessage general_exp_dithering(const Vec& x, double base, int levels,
                                        double norm_order, Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::GeneralExpDithering;
  spec.base = base;
  spec.levels = levels;
  spec.norm_order = norm_order;
  return compress(spec, x, rng);
}

CompressedMessage natural_dithering(const Vec& x, int levels, double norm_order,
                                    Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::NaturalDithering;
  spec.base = 2.0;
  spec.levels = levels;
  spec.norm_order = norm_order;
  return compress(spec, x, rng);
}

CompressedMessage topk_plus_dithering(const Vec& x, int k, double base, int levels,
                                      double norm_order, Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::TopKPlusDithering;
  spec.k = k;
  spec.base = base;
  spec.levels = levels;
  spec.norm_order = norm_order;
  return compress(spec, x, rng);
}

CompressedMessage normal_form_compress(const Vec& x, Rng& rng) {
  CompressorSpec spec;
  spec.kind = Kind::NormalForm;
  return compress(spec, x, rng);
}

namespace {

CompressedMessage compress_identity(const CompressorSpec& spec, const Vec& x) {
  CompressedMessage msg;
  msg.decoded.resize(x.size());
  PayloadWriter w;
  w.u8(static_cast<std::uint8_t>(Kind::Identity));
  w.u32(static_cast<std::uint32_t>(x.size()));
  w.f64(spec.scale);
  for (std::size_t i = 0; i < x.size(); ++i) {
    msg.decoded[i] = spec.scale * x[i];
    w.f64(x[i]);
  }
  msg.payload = std::move(w.bytes);
  msg.bit_cost = bit_cost_model(spec, static_cast<int>(x.size()),
                                static_cast<int>(x.size()));
  return msg;
}

CompressedMessage compress_rand_k(const CompressorSpec& spec, const Vec& x,
                                  Rng& rng) {
  const int d = static_cast<int>(x.size());
  // Partial Fisher-Yates draw of a uniform k-subset.
  std::vector<std::uint32_t> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < spec.k; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_index(d - i));
    std::swap(pool[i], pool[j]);
  }
  SparseResult sr;
  sr.gain = static_cast<double>(d) / spec.k;
  sr.indices.assign(pool.begin(), pool.begin() + spec.k);
  std::sort(sr.indices.begin(), sr.indices.end());
  return finish_sparse(x, spec, sr);
}

CompressedMessage compress_biased_random_sparse(const CompressorSpec& spec,
                                                const Vec& x, Rng& rng) {
  SparseResult sr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.uniform() < spec.probs[i]) sr.indices.push_back(static_cast<std::uint32_t>(i));
  }
  return finish_sparse(x, spec, sr);
}

CompressedMessage compress_adaptive(const CompressorSpec& spec, const Vec& x,
                                    Rng& rng) {
  const double total = nrm1(x);
  if (total == 0.0) {
    throw std::domain_error("adaptive random sparsification undefined on the zero vector");
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::uint32_t pick = static_cast<std::uint32_t>(x.size()) - 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += std::fabs(x[i]);
    if (u < acc) {
      pick = static_cast<std::uint32_t>(i);
      break;
    }
  }
  SparseResult sr;
  sr.indices = {pick};
  return finish_sparse(x, spec, sr);
}

CompressedMessage compress_top_k(const CompressorSpec& spec, const Vec& x) {
  SparseResult sr;
  sr.indices = top_k_indices(x, spec.k);
  return finish_sparse(x, spec, sr);
}

CompressedMessage compress_dithering(const CompressorSpec& spec, const Vec& x,
                                     Rng& rng) {
  const auto d = static_cast<std::uint32_t>(x.size());
  const double norm = lp_norm(x, spec.norm_order);
  CompressedMessage msg;
  msg.decoded = zeros(x.size());
  PayloadWriter w;
  w.u8(static_cast<std::uint8_t>(spec.kind));
  w.u32(d);
  w.f64(spec.scale);
  w.f64(spec.base);
  w.f64(norm);
  w.u16(static_cast<std::uint16_t>(spec.levels));
  for (std::uint32_t i = 0; i < d; ++i) {
    std::int8_t s = sign_of(x[i]);
    int level = -1;
    if (s != 0 && norm > 0.0) {
      level = dither_level(std::fabs(x[i]) / norm, spec.base, spec.levels, rng);
    }
    if (level < 0) {
      w.i8(0);
      w.i16(-1);
    } else {
      msg.decoded[i] = spec.scale * s * norm * pow_base(spec.base, -level);
      w.i8(s);
      w.i16(static_cast<std::int16_t>(level));
    }
  }
  msg.payload = std::move(w.bytes);
  msg.bit_cost = bit_cost_model(spec, static_cast<int>(d), static_cast<int>(d));
  return msg;
}

CompressedMessage compress_topk_dither(const CompressorSpec& spec, const Vec& x,
                                       Rng& rng) {
  const auto keep = top_k_indices(x, spec.k);
  Vec sparse = zeros(x.size());
  for (auto i : keep) sparse[i] = x[i];
  const double norm = lp_norm(sparse, spec.norm_order);

  CompressedMessage msg;
  msg.decoded = zeros(x.size());
  PayloadWriter w;
  w.u8(static_cast<std::uint8_t>(spec.kind));
  w.u32(static_cast<std::uint32_t>(x.size()));
  w.f64(spec.scale);
  w.f64(spec.base);
  w.f64(norm);
  w.u16(static_cast<std::uint16_t>(spec.levels));
  w.u32(static_cast<std::uint32_t>(keep.size()));
  for (auto i : keep) {
    std::int8_t s = sign_of(sparse[i]);
    int level = -1;
    if (s != 0 && norm > 0.0) {
      level = dither_level(std::fabs(sparse[i]) / norm, spec.base, spec.levels, rng);
    }
    if (level < 0) s = 0;
    if (s != 0) {
      msg.decoded[i] = spec.scale * s * norm * pow_base(spec.base, -level);
    }
    w.u32(i);
    w.i8(s);
    w.i16(static_cast<std::int16_t>(s == 0 ? -1 : level));
  }
  msg.payload = std::move(w.bytes);
  msg.bit_cost = bit_cost_model(spec, static_cast<int>(x.size()),
                                static_cast<int>(keep.size()));
  return msg;
}

void normal_form_scalar(double t, Rng& rng, int& mant_tenths, int& q) {
  const NfCase c = nf_case(t);
  q = c.q;
  mant_tenths = rng.uniform() < c.p_hi ? c.hi_mant : c.lo_mant;
}

CompressedMessage compress_normal_form(const CompressorSpec& spec, const Vec& x,
                                       Rng& rng) {
  const auto d = static_cast<std::uint32_t>(x.size());
  CompressedMessage msg;
  msg.decoded = zeros(x.size());
  PayloadWriter w;
  w.u8(static_cast<std::uint8_t>(Kind::NormalForm));
  w.u32(d);
  w.f64(spec.scale);
  for (std::uint32_t i = 0; i < d; ++i) {
    const std::int8_t s = sign_of(x[i]);
    if (s == 0) {
      w.i8(0);
      w.u8(0);
      w.i16(0);
      continue;
    }
    int mant = 0, q = 0;
    normal_form_scalar(std::fabs(x[i]), rng, mant, q);
    msg.decoded[i] = spec.scale * s * nf_value(mant, q);
    w.i8(s);
    w.u8(static_cast<std::uint8_t>(mant));
    w.i16(static_cast<std::int16_t>(q));
  }
  msg.payload = std::move(w.bytes);
  msg.bit_cost = bit_cost_model(spec, static_cast<int>(d), static_cast<int>(d));
  return msg;
}

}  // namespace

CompressedMessage compress(const CompressorSpec& spec, const Vec& x, Rng& rng) {
  spec.validate(static_cast<int>(x.size()));
  if (!all_finite(x)) throw std::domain_error("input vector has non-finite entries");
  switch (spec.kind) {
    case Kind::Identity: return compress_identity(spec, x);
    case Kind::RandK: return compress_rand_k(spec, x, rng);
    case Kind::BiasedRandomSparse: return compress_biased_random_sparse(spec, x, rng);
    case Kind::AdaptiveRandomSparse: return compress_adaptive(spec, x, rng);
    case Kind::TopK: return compress_top_k(spec, x);
    case Kind::GeneralUnbiasedRounding: return rounding_message(x, spec, false, &rng);
    case Kind::GeneralBiasedRounding: return rounding_message(x, spec, true, nullptr);
    case Kind::NaturalCompression: {
      CompressorSpec nat = spec;
      nat.base = 2.0;
      return rounding_message(x, nat, false, &rng);
    }
    case Kind::GeneralExpDithering: return compress_dithering(spec, x, rng);
    case Kind::NaturalDithering: {
      CompressorSpec nat = spec;
      nat.base = 2.0;
      return compress_dithering(nat, x, rng);
    }
    case Kind::TopKPlusDithering: return compress_topk_dither(spec, x, rng);
    case Kind::NormalForm: return compress_normal_form(spec, x, rng);
  }
  throw std::logic_error("unreachable compressor kind");
}

Vec decode_payload(const std::vector<std::uint8_t>& payload) {
  PayloadReader r{payload};
  const Kind kind = static_cast<Kind>(r.u8());
  const std::uint32_t dim = r.u32();
  const double scale = r.f64();
  Vec out = zeros(dim);
  switch (kind) {
    case Kind::Identity: {
      for (std::uint32_t i = 0; i < dim; ++i) out[i] = scale * r.f64();
      return out;
    }
    case Kind::RandK:
    case Kind::BiasedRandomSparse:
    case Kind::AdaptiveRandomSparse:
    case Kind::TopK: {
      const double gain = r.f64();
      const std::uint32_t nnz = r.u32();
      for (std::uint32_t j = 0; j < nnz; ++j) {
        const std::uint32_t i = r.u32();
        out.at(i) = scale * gain * r.f64();
      }
      return out;
    }
    case Kind::GeneralUnbiasedRounding:
    case Kind::GeneralBiasedRounding:
    case Kind::NaturalCompression: {
      const double base = r.f64();
      for (std::uint32_t i = 0; i < dim; ++i) {
        const std::int8_t s = r.i8();
        const std::int32_t e = r.i32();
        if (s != 0) out[i] = scale * s * pow_base(base, e);
      }
      return out;
    }
    case Kind::GeneralExpDithering:
    case Kind::NaturalDithering: {
      const double base = r.f64();
      const double norm = r.f64();
      r.u16();  // levels, not needed to decode
      for (std::uint32_t i = 0; i < dim; ++i) {
        const std::int8_t s = r.i8();
        const std::int16_t lvl = r.i16();
        if (s != 0 && lvl >= 0) out[i] = scale * s * norm * pow_base(base, -lvl);
      }
      return out;
    }
    case Kind::TopKPlusDithering: {
      const double base = r.f64();
      const double norm = r.f64();
      r.u16();
      const std::uint32_t nnz = r.u32();
      for (std::uint32_t j = 0; j < nnz; ++j) {
        const std::uint32_t i = r.u32();
        const std::int8_t s = r.i8();
        const std::int16_t lvl = r.i16();
        if (s != 0 && lvl >= 0) out.at(i) = scale * s * norm * pow_base(base, -lvl);
      }
      return out;
    }
    case Kind::NormalForm: {
      for (std::uint32_t i = 0; i < dim; ++i) {
        const std::int8_t s = r.i8();
        const std::uint8_t mant = r.u8();
        const std::int16_t q = r.i16();
        if (s != 0) out[i] = scale * s * nf_value(mant, q);
      }
      return out;
    }
  }
  throw std::logic_error("unreachable payload tag");
}

}  // namespace gcomp
