// Copyright 2026 The CopyNE Authors
//
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

#include "copyne/network.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "copyne/binary_io.h"

namespace copyne {

namespace {

constexpr double kMasked = -1e30;

std::string layer_prefix(const char* stack, std::size_t layer) {
  return std::string(stack) + "." + std::to_string(layer) + ".";
}

// Pre-norm residual blocks. Every block is row-wise except attention, and
// attention only mixes rows through a masked softmax, so decoder row j
// never reads rows after j.

Var layer_norm_affine(Graph& g, const Parameters& p, const std::string& name,
                      Var x) {
  return add(mul(layer_norm(x), g.parameter(p, name + ".g")),
             g.parameter(p, name + ".b"));
}

Var attend(Var q, Var k, Var v, std::size_t heads, const Var* mask) {
  const std::size_t width = q.cols();
  const std::size_t dh = width / heads;
  const double norm = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t lo = h * dh, hi = lo + dh;
    Var qh = heads == 1 ? q : slice(q, 1, lo, hi);
    Var kh = heads == 1 ? k : slice(k, 1, lo, hi);
    Var vh = heads == 1 ? v : slice(v, 1, lo, hi);
    Var s = scale(matmul(qh, kh, true), norm);
    if (mask != nullptr) s = add(s, *mask);
    outs.push_back(matmul(softmax(s), vh));
  }
  return heads == 1 ? outs.front() : concat(outs, 1);
}

Var self_attention(Graph& g, const Parameters& p, const std::string& name,
                   Var x, std::size_t heads, const Var* mask) {
  const std::size_t d = x.cols();
  // No key bias: it shifts every score in a row equally and has no effect.
  Var qkv = matmul(x, g.parameter(p, name + ".wqkv"));
  Var q = add(slice(qkv, 1, 0, d), g.parameter(p, name + ".bq"));
  Var k = slice(qkv, 1, d, 2 * d);
  Var v = add(slice(qkv, 1, 2 * d, 3 * d), g.parameter(p, name + ".bv"));
  Var o = attend(q, k, v, heads, mask);
  return linear(o, g.parameter(p, name + ".wo"), g.parameter(p, name + ".bo"));
}

Var cross_attention(Graph& g, const Parameters& p, const std::string& name,
                    Var x, Var k, Var v, std::size_t heads) {
  Var q = linear(x, g.parameter(p, name + ".wq"), g.parameter(p, name + ".bq"));
  Var o = attend(q, k, v, heads, nullptr);
  return linear(o, g.parameter(p, name + ".wo"), g.parameter(p, name + ".bo"));
}

Var feed_forward(Graph& g, const Parameters& p, const std::string& name, Var x) {
  Var hdn = relu(linear(x, g.parameter(p, name + ".w1"), g.parameter(p, name + ".b1")));
  return linear(hdn, g.parameter(p, name + ".w2"), g.parameter(p, name + ".b2"));
}

Tensor causal_mask(std::size_t n) {
  Tensor m({n, n}, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = kMasked;
  return m;
}

// Parameter construction ---------------------------------------------------

class Initializer {
 public:
  Initializer(Parameters& params, Rng& rng) : params_(params), rng_(rng) {}

  void dense(const std::string& name, std::size_t in, std::size_t out) {
    Tensor w({in, out}, 0.0);
    const double sd = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : w.data()) v = rng_.normal(0.0, sd);
    params_.add(name, std::move(w));
  }
  void bias(const std::string& name, std::size_t n, double fill = 0.0) {
    params_.add(name, Tensor({1, n}, fill));
  }
  void normal(const std::string& name, std::size_t r, std::size_t c, double sd) {
    Tensor w({r, c}, 0.0);
    for (auto& v : w.data()) v = rng_.normal(0.0, sd);
    params_.add(name, std::move(w));
  }
  void layer_norm(const std::string& name, std::size_t n) {
    params_.add(name + ".g", Tensor({1, n}, 1.0));
    params_.add(name + ".b", Tensor({1, n}, 0.0));
  }

 private:
  Parameters& params_;
  Rng& rng_;
};

}  // namespace

const char* mode_name(ModelMode mode) {
  return mode == ModelMode::kBaseline ? "baseline" : "copyne";
}

ModelMode parse_mode(const std::string& name) {
  if (name == "baseline") return ModelMode::kBaseline;
  if (name == "copyne") return ModelMode::kCopyNE;
  throw ModelError("unknown mode '" + name + "' (expected baseline or copyne)");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ModelError(std::string(what) + " must be positive");
  };
  positive(d_model, "d_model");
  positive(n_heads, "n_heads");
  positive(n_enc_layers, "n_enc_layers");
  positive(n_dec_layers, "n_dec_layers");
  positive(d_ff, "d_ff");
  positive(d_attention, "d_attention");
  positive(ne_lstm_layers, "ne_lstm_layers");
  positive(ne_hidden, "ne_hidden");
  positive(frame_dim, "frame_dim");
  positive(max_positions, "max_positions");
  if (d_model % n_heads != 0) {
    throw ModelError("d_model (" + std::to_string(d_model) +
                     ") must be divisible by n_heads (" +
                     std::to_string(n_heads) + ")");
  }
}

ModelConfig ModelConfig::full_scale() {
  ModelConfig c;
  c.d_model = 256;
  c.n_heads = 4;
  c.n_enc_layers = 6;
  c.n_dec_layers = 6;
  c.d_ff = 2048;
  c.d_attention = 256;
  c.ne_lstm_layers = 3;
  c.ne_hidden = 512;
  c.frame_dim = 80;
  return c;
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "mode=" << mode_name(mode) << '\n'
     << "d_model=" << d_model << '\n'
     << "n_heads=" << n_heads << '\n'
     << "n_enc_layers=" << n_enc_layers << '\n'
     << "n_dec_layers=" << n_dec_layers << '\n'
     << "d_ff=" << d_ff << '\n'
     << "d_attention=" << d_attention << '\n'
     << "ne_lstm_layers=" << ne_lstm_layers << '\n'
     << "ne_hidden=" << ne_hidden << '\n'
     << "frame_dim=" << frame_dim << '\n'
     << "max_positions=" << max_positions << '\n'
     << "positional_encoding=" << (positional_encoding ? 1 : 0) << '\n';
  return os.str();
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  auto size_of = [&](const char* key, std::size_t& field) {
    if (auto it = kv.find(key); it != kv.end()) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        field = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw ModelError(std::string("bad value for ") + key + ": '" +
                         it->second + "'");
      }
    }
  };
  if (auto it = kv.find("mode"); it != kv.end()) c.mode = parse_mode(it->second);
  size_of("d_model", c.d_model);
  size_of("n_heads", c.n_heads);
  size_of("n_enc_layers", c.n_enc_layers);
  size_of("n_dec_layers", c.n_dec_layers);
  size_of("d_ff", c.d_ff);
  size_of("d_attention", c.d_attention);
  size_of("ne_lstm_layers", c.ne_lstm_layers);
  size_of("ne_hidden", c.ne_hidden);
  size_of("frame_dim", c.frame_dim);
  size_of("max_positions", c.max_positions);
  std::size_t pos = c.positional_encoding ? 1 : 0;
  size_of("positional_encoding", pos);
  c.positional_encoding = pos != 0;
  c.validate();
  return c;
}

Model::Model(ModelConfig config, Vocab vocab, Parameters params)
    : config_(config), vocab_(std::move(vocab)), params_(std::move(params)) {
  config_.validate();
}

Model Model::initialize(const ModelConfig& config, const Vocab& vocab, Rng& rng) {
  config.validate();
  Parameters p;
  Initializer init(p, rng);
  const std::size_t d = config.d_model;
  const std::size_t v = vocab.size();
  const std::size_t classes = vocab.decoder_classes();

  init.dense("enc.in.w", config.frame_dim, d);
  init.bias("enc.in.b", d);
  for (std::size_t l = 0; l < config.n_enc_layers; ++l) {
    const auto pre = layer_prefix("enc", l);
    init.layer_norm(pre + "ln1", d);
    init.dense(pre + "attn.wqkv", d, 3 * d);
    init.bias(pre + "attn.bq", d);
    init.bias(pre + "attn.bv", d);
    init.dense(pre + "attn.wo", d, d);
    init.bias(pre + "attn.bo", d);
    init.layer_norm(pre + "ln2", d);
    init.dense(pre + "ff.w1", d, config.d_ff);
    init.bias(pre + "ff.b1", config.d_ff);
    init.dense(pre + "ff.w2", config.d_ff, d);
    init.bias(pre + "ff.b2", d);
  }
  init.layer_norm("enc.ln", d);

  init.normal("dec.embed", v, d, 1.0);
  for (std::size_t l = 0; l < config.n_dec_layers; ++l) {
    const auto pre = layer_prefix("dec", l);
    init.layer_norm(pre + "ln1", d);
    init.dense(pre + "self.wqkv", d, 3 * d);
    init.bias(pre + "self.bq", d);
    init.bias(pre + "self.bv", d);
    init.dense(pre + "self.wo", d, d);
    init.bias(pre + "self.bo", d);
    init.layer_norm(pre + "ln2", d);
    init.dense(pre + "cross.wq", d, d);
    init.bias(pre + "cross.bq", d);
    init.dense(pre + "cross.wkv", d, 2 * d);
    init.bias(pre + "cross.bv", d);
    init.dense(pre + "cross.wo", d, d);
    init.bias(pre + "cross.bo", d);
    init.layer_norm(pre + "ln3", d);
    init.dense(pre + "ff.w1", d, config.d_ff);
    init.bias(pre + "ff.b1", config.d_ff);
    init.dense(pre + "ff.w2", config.d_ff, d);
    init.bias(pre + "ff.b2", d);
  }
  init.layer_norm("dec.ln", d);

  init.dense("ctc.w", d, v);
  init.bias("ctc.b", v);

  if (config.mode == ModelMode::kCopyNE) {
    const std::size_t hdim = config.ne_hidden;
    init.normal("ne.embed", v, d, 1.0);
    for (std::size_t l = 0; l < config.ne_lstm_layers; ++l) {
      const auto pre = layer_prefix("ne.lstm", l);
      init.dense(pre + "wx", l == 0 ? d : hdim, 4 * hdim);
      init.dense(pre + "wh", hdim, 4 * hdim);
      Tensor b({1, 4 * hdim}, 0.0);
      for (std::size_t j = hdim; j < 2 * hdim; ++j) b[j] = 1.0;  // forget gate
      p.add(pre + "b", std::move(b));
    }
    init.normal("ne.z0", 1, hdim, 1.0 / std::sqrt(static_cast<double>(hdim)));
    init.dense("copy.wq", d, config.d_attention);
    init.dense("copy.wk", hdim, config.d_attention);
    init.dense("out.w", d + hdim, classes);
  } else {
    init.dense("out.w", d, classes);
  }
  init.bias("out.b", classes);
  return Model(config, vocab, std::move(p));
}

Tensor positional_table(std::size_t length, std::size_t width) {
  Tensor pe({length, width}, 0.0);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < width; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) /
                                                static_cast<double>(width));
      const double angle = static_cast<double>(pos) * freq;
      pe.at(pos, i) = std::sin(angle);
      if (i + 1 < width) pe.at(pos, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

Var encode_audio(Graph& g, const Model& model, const Tensor& frames) {
  const auto& cfg = model.config();
  const auto& p = model.params();
  if (frames.rank() != 2 || frames.cols() != cfg.frame_dim) {
    throw ModelError("frames have shape " + shape_to_string(frames.shape()) +
                     ", model expects [T, " + std::to_string(cfg.frame_dim) + "]");
  }
  const std::size_t t = frames.rows();
  if (t > cfg.max_positions) {
    throw ModelError("utterance of " + std::to_string(t) +
                     " frames exceeds max_positions");
  }
  Var x = linear(g.external(frames), g.parameter(p, "enc.in.w"),
                 g.parameter(p, "enc.in.b"));
  if (cfg.positional_encoding) {
    x = add(x, g.constant(positional_table(t, cfg.d_model)));
  }
  x = dropout(x);
  for (std::size_t l = 0; l < cfg.n_enc_layers; ++l) {
    const auto pre = layer_prefix("enc", l);
    x = add(x, dropout(self_attention(g, p, pre + "attn",
                                      layer_norm_affine(g, p, pre + "ln1", x),
                                      cfg.n_heads, nullptr)));
    x = add(x, dropout(feed_forward(g, p, pre + "ff",
                                    layer_norm_affine(g, p, pre + "ln2", x))));
  }
  return layer_norm_affine(g, model.params(), "enc.ln", x);
}

Var ctc_log_probs(Graph& g, const Model& model, Var h) {
  const auto& p = model.params();
  return log_softmax(linear(h, g.parameter(p, "ctc.w"), g.parameter(p, "ctc.b")));
}

CrossMemory cross_memory(Graph& g, const Model& model, Var h) {
  const auto& cfg = model.config();
  const auto& p = model.params();
  const std::size_t d = cfg.d_model;
  CrossMemory mem;
  for (std::size_t l = 0; l < cfg.n_dec_layers; ++l) {
    const auto name = layer_prefix("dec", l) + "cross";
    Var kv = matmul(h, g.parameter(p, name + ".wkv"));
    mem.keys.push_back(slice(kv, 1, 0, d));
    mem.values.push_back(add(slice(kv, 1, d, 2 * d), g.parameter(p, name + ".bv")));
  }
  return mem;
}

Var decoder_states(Graph& g, const Model& model, std::span<const TokenId> history,
                   Var h) {
  return decoder_states(g, model, history, cross_memory(g, model, h));
}

Var decoder_states(Graph& g, const Model& model, std::span<const TokenId> history,
                   const CrossMemory& mem) {
  const auto& cfg = model.config();
  const auto& p = model.params();
  if (history.empty() || history.front() != Vocab::kBos) {
    throw ModelError("decoder history must start with <s>");
  }
  if (history.size() > cfg.max_positions) {
    throw ModelError("decoder history exceeds max_positions");
  }
  std::vector<std::size_t> ids;
  ids.reserve(history.size());
  for (TokenId t : history) {
    if (t == Vocab::kBlank) throw ModelError("decoder history contains <blank>");
    if (t < 0 || static_cast<std::size_t>(t) >= model.vocab().size()) {
      throw ModelError("decoder history token " + std::to_string(t) + " out of range");
    }
    ids.push_back(static_cast<std::size_t>(t));
  }
  const std::size_t n = ids.size();
  Var x = gather_rows(g.parameter(p, "dec.embed"), std::move(ids));
  if (cfg.positional_encoding) {
    x = add(x, g.constant(positional_table(n, cfg.d_model)));
  }
  const Var mask = g.constant(causal_mask(n));
  x = dropout(x);
  for (std::size_t l = 0; l < cfg.n_dec_layers; ++l) {
    const auto pre = layer_prefix("dec", l);
    x = add(x, dropout(self_attention(g, p, pre + "self",
                                      layer_norm_affine(g, p, pre + "ln1", x),
                                      cfg.n_heads, &mask)));
    x = add(x, dropout(cross_attention(g, p, pre + "cross",
                                       layer_norm_affine(g, p, pre + "ln2", x),
                                       mem.keys.at(l), mem.values.at(l), cfg.n_heads)));
    x = add(x, dropout(feed_forward(g, p, pre + "ff",
                                    layer_norm_affine(g, p, pre + "ln3", x))));
  }
  return layer_norm_affine(g, p, "dec.ln", x);
}

Var encode_entities(Graph& g, const Model& model, const EntityDict& dict) {
  if (!model.copyne()) throw ModelError("baseline models have no entity encoder");
  const auto& cfg = model.config();
  const auto& p = model.params();
  const std::size_t hdim = cfg.ne_hidden;
  Var z0 = g.parameter(p, "ne.z0");
  if (dict.entity_count() == 0) return z0;

  for (std::size_t i = 1; i < dict.size(); ++i) {
    for (TokenId t : dict.entry(i)) {
      if (!Vocab::is_content(t) || static_cast<std::size_t>(t) >= model.vocab().size()) {
        throw ModelError("entity " + std::to_string(i) + " has invalid token " +
                         std::to_string(t));
      }
    }
  }

  // Entities of equal length run through the LSTM as one batch.
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 1; i < dict.size(); ++i) {
    by_length[dict.entry(i).size()].push_back(i);
  }
  Var embed = g.parameter(p, "ne.embed");
  std::vector<Var> blocks{z0};
  std::vector<std::size_t> stacked_row(dict.size(), 0);
  std::size_t row = 1;
  for (const auto& [len, members] : by_length) {
    const std::size_t n = members.size();
    std::vector<Var> inputs;
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<std::size_t> ids;
      for (auto m : members) ids.push_back(static_cast<std::size_t>(dict.entry(m)[t]));
      inputs.push_back(gather_rows(embed, std::move(ids)));
    }
    for (std::size_t l = 0; l < cfg.ne_lstm_layers; ++l) {
      const auto pre = layer_prefix("ne.lstm", l);
      Var wx = g.parameter(p, pre + "wx");
      Var wh = g.parameter(p, pre + "wh");
      Var b = g.parameter(p, pre + "b");
      Var hs = g.constant(Tensor({n, hdim}, 0.0));
      Var cs = hs;
      std::vector<Var> outputs;
      for (std::size_t t = 0; t < len; ++t) {
        Var gates = add(add(matmul(inputs[t], wx), matmul(hs, wh)), b);
        Var ig = sigmoid(slice(gates, 1, 0, hdim));
        Var fg = sigmoid(slice(gates, 1, hdim, 2 * hdim));
        Var cand = tanh(slice(gates, 1, 2 * hdim, 3 * hdim));
        Var og = sigmoid(slice(gates, 1, 3 * hdim, 4 * hdim));
        cs = add(mul(fg, cs), mul(ig, cand));
        hs = mul(og, tanh(cs));
        outputs.push_back(hs);
      }
      inputs = std::move(outputs);
    }
    blocks.push_back(inputs.back());
    for (auto m : members) stacked_row[m] = row++;
  }
  Var stacked = concat(blocks, 0);
  return gather_rows(stacked, std::move(stacked_row));
}

Var entity_keys(Graph& g, const Model& model, Var entities) {
  return matmul(entities, g.parameter(model.params(), "copy.wk"));
}

CopyAttention copy_attention_with_keys(Graph& g, const Model& model, Var states,
                                       Var keys) {
  const auto& cfg = model.config();
  Var q = matmul(states, g.parameter(model.params(), "copy.wq"));
  Var scores = scale(matmul(q, keys, true),
                     1.0 / std::sqrt(static_cast<double>(cfg.d_attention)));
  return {scores, softmax(scores)};
}

CopyAttention copy_attention(Graph& g, const Model& model, Var states,
                             Var entities) {
  if (!model.copyne()) throw ModelError("baseline models have no copy attention");
  return copy_attention_with_keys(g, model, states, entity_keys(g, model, entities));
}

DictStep dict_enhanced_step(Graph& g, const Model& model, Var states,
                            Var entities, Var copy_probs) {
  if (!model.copyne()) throw ModelError("baseline models have no dictionary head");
  const auto& p = model.params();
  Var repr = matmul(copy_probs, entities);
  Var logits = linear(concat({states, repr}, 1), g.parameter(p, "out.w"),
                      g.parameter(p, "out.b"));
  return {repr, softmax(logits)};
}

Var baseline_step(Graph& g, const Model& model, Var states) {
  if (model.copyne()) throw ModelError("CopyNE models use dict_enhanced_step");
  const auto& p = model.params();
  return softmax(linear(states, g.parameter(p, "out.w"), g.parameter(p, "out.b")));
}

// Checkpoints -----------------------------------------------------------------

namespace {
constexpr char kCheckpointMagic[4] = {'C', 'P', 'N', 'E'};
constexpr std::uint16_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::string out(kCheckpointMagic, 4);
  binary::put<std::uint16_t>(out, kCheckpointVersion);
  const std::string config =
      model.config().to_text() + "vocab=" + model.vocab().content_string() + "\n";
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
  out += config;
  for (const auto& name : model.params().names()) {
    const Tensor& t = model.params().get(name);
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    binary::put<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (auto dim : t.shape()) binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    for (double v : t.data()) binary::put<double>(out, v);
  }
  binary::write_file(path, out);
}

Model load_checkpoint(const std::filesystem::path& path) {
  const std::string data = binary::read_file(path);
  binary::Reader r(data, path.string());
  if (r.bytes(4, "magic") != std::string_view(kCheckpointMagic, 4)) {
    throw binary::FormatError(path.string() + ": not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint16_t>("version");
  if (version != kCheckpointVersion) {
    throw binary::FormatError(path.string() + ": unsupported checkpoint version " +
                              std::to_string(version));
  }
  const auto config_len = r.get<std::uint32_t>("config length");
  const std::string config(r.bytes(config_len, "config block"));
  std::map<std::string, std::string> kv;
  std::istringstream lines(config);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw binary::FormatError(path.string() + ": bad config line '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  std::string vocab_text;
  if (auto it = kv.find("vocab"); it != kv.end()) {
    vocab_text = it->second;
    kv.erase(it);
  }
  const ModelConfig cfg = ModelConfig::from_map(kv);
  Vocab vocab(utf8_chars(vocab_text));

  Parameters params;
  while (!r.done()) {
    const auto name_len = r.get<std::uint16_t>("tensor name length");
    const std::string name(r.bytes(name_len, "tensor name"));
    const auto rank = r.get<std::uint8_t>("tensor rank");
    Shape shape;
    for (std::uint8_t i = 0; i < rank; ++i) {
      shape.push_back(r.get<std::uint32_t>("tensor dimension"));
    }
    const std::size_t count = shape_numel(shape);
    r.need(count * 8, "tensor values");
    std::vector<double> values(count);
    for (auto& v : values) v = r.get<double>("tensor value");
    params.add(name, Tensor(shape, std::move(values)));
  }
  // Structural check against a freshly shaped model.
  Rng probe(0, "init");
  const Model reference = Model::initialize(cfg, vocab, probe);
  for (const auto& name : reference.params().names()) {
    if (!params.contains(name)) {
      throw binary::FormatError(path.string() + ": missing tensor '" + name + "'");
    }
    if (params.get(name).shape() != reference.params().get(name).shape()) {
      throw binary::FormatError(
          path.string() + ": tensor '" + name + "' has shape " +
          shape_to_string(params.get(name).shape()) + ", expected " +
          shape_to_string(reference.params().get(name).shape()));
    }
  }
  if (params.size() != reference.params().size()) {
    throw binary::FormatError(path.string() + ": unexpected extra tensors");
  }
  return Model(cfg, std::move(vocab), std::move(params));
}

}  // namespace copyne
