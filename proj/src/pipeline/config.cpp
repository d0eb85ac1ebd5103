#include "texcomp/pipeline/config.hpp"

#include "texcomp/error.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace texcomp {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format(bool v) { return v ? "true" : "false"; }

template <typename T>
std::string format_integer(T v) {
  return std::to_string(v);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw Error(Errc::invalid_argument, "config key '" + key + "': '" + value + "' is not " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc{} || r.ptr != value.data() + value.size()) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::vector<int> parse_widths(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& s : split_list(value)) out.push_back(parse_number<int>(key, s));
  if (out.empty()) bad_value(key, value, "a comma-separated list of layer widths");
  return out;
}

std::string format_widths(const std::vector<int>& w) {
  std::vector<std::string> s;
  for (int x : w) s.push_back(std::to_string(x));
  return join(s);
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
};

#define TEXCOMP_INT_FIELD(name, member, type)                                                      \
  Field {                                                                                         \
    name, [](const RunConfig& c) { return format_integer(c.member); },                            \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_number<type>(k, v); } \
  }
#define TEXCOMP_REAL_FIELD(name, member)                                                           \
  Field {                                                                                         \
    name, [](const RunConfig& c) { return format(double(c.member)); },                            \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_number<double>(k, v); } \
  }
#define TEXCOMP_BOOL_FIELD(name, member)                                                           \
  Field {                                                                                         \
    name, [](const RunConfig& c) { return format(bool(c.member)); },                              \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      TEXCOMP_INT_FIELD("seed", seed, std::uint64_t),
      TEXCOMP_INT_FIELD("resolution", resolution, int),
      TEXCOMP_INT_FIELD("atlas_size", atlas_size, int),
      {"dataset", [](const RunConfig& c) { return c.dataset; },
       [](RunConfig& c, const std::string&, const std::string& v) { c.dataset = v; }},
      {"fixtures", [](const RunConfig& c) { return join(c.fixtures); },
       [](RunConfig& c, const std::string&, const std::string& v) { c.fixtures = split_list(v); }},
      {"partiality", [](const RunConfig& c) { return to_string(c.partiality); },
       [](RunConfig& c, const std::string&, const std::string& v) { c.partiality = partiality_from_string(v); }},
      {"test_partiality", [](const RunConfig& c) { return to_string(c.test_partiality); },
       [](RunConfig& c, const std::string&, const std::string& v) { c.test_partiality = partiality_from_string(v); }},
      TEXCOMP_INT_FIELD("train_draws", train_draws, int),
      TEXCOMP_INT_FIELD("test_draws", test_draws, int),
      TEXCOMP_INT_FIELD("holes.count", holes.count, int),
      TEXCOMP_REAL_FIELD("holes.radius_min", holes.radius_min),
      TEXCOMP_REAL_FIELD("holes.radius_max", holes.radius_max),
      TEXCOMP_REAL_FIELD("holes.max_removed_fraction", holes.max_removed_fraction),
      TEXCOMP_INT_FIELD("holes.max_attempts", holes.max_attempts, int),
      TEXCOMP_INT_FIELD("model.shape_base_channels", model.shape_base_channels, int),
      TEXCOMP_INT_FIELD("model.texture_base_channels", model.texture_base_channels, int),
      {"model.shape_decoder_widths", [](const RunConfig& c) { return format_widths(c.model.shape_decoder_widths); },
       [](RunConfig& c, const std::string& k, const std::string& v) { c.model.shape_decoder_widths = parse_widths(k, v); }},
      {"model.texture_decoder_widths",
       [](const RunConfig& c) { return format_widths(c.model.texture_decoder_widths); },
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.model.texture_decoder_widths = parse_widths(k, v);
       }},
      TEXCOMP_REAL_FIELD("model.displacement", model.displacement),
      TEXCOMP_BOOL_FIELD("model.fusion", model.fusion),
      {"model.schedule", [](const RunConfig& c) { return c.model.schedule; },
       [](RunConfig& c, const std::string&, const std::string& v) { c.model.schedule = v; }},
      TEXCOMP_REAL_FIELD("train.learning_rate", train.learning_rate),
      TEXCOMP_INT_FIELD("train.epochs", train.epochs, int),
      TEXCOMP_INT_FIELD("train.subsample", train.subsample, int),
      TEXCOMP_INT_FIELD("train.batch_size", train.batch_size, int),
      TEXCOMP_REAL_FIELD("train.shape_weight", train.shape_weight),
      TEXCOMP_REAL_FIELD("train.texture_weight", train.texture_weight),
      TEXCOMP_INT_FIELD("train.bank_size", bank_size, int),
      TEXCOMP_INT_FIELD("train.voxel_points", voxel_points, int),
      TEXCOMP_INT_FIELD("complete.out_resolution", out_resolution, int),
      TEXCOMP_INT_FIELD("inpaint.base_channels", inpaint.base_channels, int),
      TEXCOMP_BOOL_FIELD("inpaint.partial", inpaint.partial),
      TEXCOMP_INT_FIELD("inpaint.iterations", inpaint_iterations, long),
      TEXCOMP_REAL_FIELD("inpaint.learning_rate", inpaint_learning_rate),
      TEXCOMP_INT_FIELD("inpaint.draws", inpaint_draws, int),
      {"refine.mode", [](const RunConfig& c) { return to_string(c.refine_mode); },
       [](RunConfig& c, const std::string&, const std::string& v) { c.refine_mode = refine_mode_from_string(v); }},
      TEXCOMP_REAL_FIELD("refine.max_distance", max_distance),
      TEXCOMP_INT_FIELD("eval.samples", score.samples, std::size_t),
      TEXCOMP_REAL_FIELD("eval.shape_d0", score.shape_d0),
      TEXCOMP_REAL_FIELD("eval.texture_d0", score.texture_d0),
  };
  return f;
}

#undef TEXCOMP_INT_FIELD
#undef TEXCOMP_REAL_FIELD
#undef TEXCOMP_BOOL_FIELD

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(Errc::invalid_argument, message);
}

void validate(const RunConfig& c) {
  const auto pow2 = [](int n) { return n > 0 && (n & (n - 1)) == 0; };
  require(pow2(c.resolution), "resolution must be a power of two");
  require(pow2(c.atlas_size) && c.atlas_size >= 32, "atlas_size must be a power of two of at least 32");
  require(pow2(c.out_resolution), "complete.out_resolution must be a power of two");
  require(c.train_draws >= 1 && c.test_draws >= 1 && c.inpaint_draws >= 1, "draw counts must be at least 1");
  require(c.train.epochs >= 1 && c.train.batch_size >= 1, "train.epochs and train.batch_size must be positive");
  require(c.train.subsample >= 1 && c.train.subsample <= c.bank_size, "train.subsample must lie in [1, train.bank_size]");
  require(c.inpaint_iterations >= 0, "inpaint.iterations must be non-negative");
  require(c.score.samples >= 1, "eval.samples must be positive");
  require(c.dataset != "fixtures" || !c.fixtures.empty(), "fixtures must list at least one fixture");
  if (c.dataset == "fixtures") {
    const auto known = standard_fixture_names();
    for (const auto& name : c.fixtures)
      require(std::find(known.begin(), known.end(), name) != known.end(),
              "unknown fixture '" + name + "'; available: " + join(known));
  }
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::stringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw Error(Errc::invalid_argument, origin + ":" + std::to_string(number) + ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

RunConfig RunConfig::from_key_values(const KeyValues& kv) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    const auto& f = fields();
    const auto it = std::find_if(f.begin(), f.end(), [&](const Field& x) { return key == x.key; });
    if (it == f.end()) throw Error(Errc::invalid_argument, "unknown config key '" + key + "'");
    it->set(c, key, value);
  }
  c.model.resolution = c.resolution;
  c.inpaint.resolution = c.atlas_size;
  c.score.seed = c.seed;
  validate(c);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return from_key_values(read_key_values(path)); }

KeyValues RunConfig::to_key_values() const {
  KeyValues kv;
  for (const Field& f : fields()) kv[f.key] = f.get(*this);
  return kv;
}

std::string RunConfig::canonical(bool upstream_only) const {
  std::string out;
  for (const auto& [k, v] : to_key_values()) {
    if (upstream_only && (k == "refine.mode" || k.rfind("eval.", 0) == 0)) continue;
    out += k + " = " + v + "\n";
  }
  return out;
}

std::string RunConfig::hash() const { return sha256_hex(canonical(true)); }

SampleOptions RunConfig::sample_options() const {
  SampleOptions o;
  o.bank_size = bank_size;
  o.voxel_points = voxel_points;
  o.allow_open_ground_truth = dataset != "fixtures";
  return o;
}

InpaintTrainConfig RunConfig::inpaint_train_config() const {
  InpaintTrainConfig c;
  c.iterations = inpaint_iterations;
  c.learning_rate = inpaint_learning_rate;
  return c;
}

namespace {

std::string hex(const unsigned char* digest, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += digits[digest[i] >> 4];
    out += digits[digest[i] & 15];
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error(Errc::io_failure, "cannot initialize SHA-256");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  std::string finish() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx_, digest, &len);
    return hex(digest, len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "cannot read " + path.string());
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, std::size_t(in.gcount()));
  }
  return h.finish();
}

}  // namespace texcomp
