// One PASS/FAIL line per primary acceptance criterion. Exit status is the
// number of failures (capped at 1). argv[1] is the favd CLI binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "favd/favd.hpp"
#include "model_support.hpp"
#include "oracle_values.hpp"

using namespace favd;
using namespace favd::avl;
using namespace testing_support;

namespace {

// Pinned tolerances and budgets.
constexpr double kGompertzOneTol = 1e-4;
constexpr double kGompertzZeroTol = 1e-3;
constexpr double kEntityTol = 1e-9;
constexpr int kEntityPairs = 64;
constexpr int kAudioTriplets = 64;
constexpr std::size_t kAudioDim = 512;
constexpr double kAudioSigmas = 3.0;
constexpr double kGradTol = 1e-3;
constexpr std::size_t kGradMinParams = 100;
constexpr int kMlmPositions = 100000;
constexpr double kMlmRate = 0.25;
constexpr double kMlmTol = 0.01;
constexpr double kOverfitLoss = 0.05;
constexpr int kOverfitSteps = 500;
constexpr int kOverfitMinExact = 7;
constexpr double kOverfitPeakLr = 3e-3;
constexpr std::uint64_t kOverfitModelSeed = 7;
constexpr std::uint64_t kOverfitTrainSeed = 11;
constexpr double kMetricTol = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(const std::string& name, double budget_s, const std::function<Outcome()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += " (over the " + std::to_string(static_cast<int>(budget_s)) + " s budget)";
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Brute-force EntityScore, written from the formula and sharing no code with
// the library: FNV-1a 64 feature hashing of word tokens, count vectors, cosine.

std::uint64_t bf_fnv(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> bf_embed(const std::string& text) {
  std::vector<double> v(512, 0.0);
  static const std::regex word("[a-z0-9]+(?:['-][a-z0-9]+)*");
  std::string lower = text;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  bool any = false;
  for (std::sregex_iterator it(lower.begin(), lower.end(), word), end; it != end; ++it) {
    v[bf_fnv(it->str()) % 512] += 1.0;
    any = true;
  }
  if (!any) v[0] = 1.0;
  return v;
}

double bf_cos(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return d / std::sqrt(na * nb);
}

double bf_entity(const std::vector<std::string>& p, const std::vector<std::string>& r) {
  double hit = 0;
  for (const auto& e : r) {
    for (const auto& q : p) {
      if (q == e) {
        hit += 1;
        break;
      }
    }
  }
  const double rec = hit / static_cast<double>(r.size());
  std::string jp, jr;
  for (std::size_t i = 0; i < p.size(); ++i) jp += (i ? ", " : "") + p[i];
  for (std::size_t i = 0; i < r.size(); ++i) jr += (i ? ", " : "") + r[i];
  const double c = (bf_cos(bf_embed(jp), bf_embed(jr)) + 1.0) / 2.0;
  return rec + c > 0 ? 2 * rec * c / (rec + c) : 0.0;
}

EntitySet as_set(std::vector<std::string> words) {
  EntitySet e;
  e.entities = std::move(words);
  return e;
}

Outcome entity_suite() {
  const std::vector<std::string> pool = {"man",   "woman", "dog",  "cat",   "guitar", "stage", "crowd",
                                         "light", "ball",  "tree", "field", "car",    "road",  "water",
                                         "bird",  "sky",   "hat",  "table", "phone",  "train"};
  Rng rng(2024);
  HashEmbedder emb(512);
  auto pick = [&](std::size_t n) {
    std::vector<std::string> out;
    while (out.size() < n) {
      const auto& w = pool[rng.below(pool.size())];
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
    return out;
  };
  double worst = 0.0;
  for (int i = 0; i < kEntityPairs; ++i) {
    const auto p = pick(1 + rng.below(6));
    const auto r = pick(1 + rng.below(6));
    const double lib = entity_score(as_set(p), as_set(r), emb).score;
    worst = std::max(worst, std::abs(lib - bf_entity(p, r)));
  }
  bool identity = true, zero = true;
  for (int i = 0; i < 16; ++i) {
    const auto s = pick(1 + rng.below(6));
    identity = identity && entity_score(as_set(s), as_set(s), emb).score == 1.0;
    auto disjoint = pick(1 + rng.below(4));
    std::erase_if(disjoint, [&](const std::string& w) { return std::find(s.begin(), s.end(), w) != s.end(); });
    if (disjoint.empty()) disjoint = {"zebra"};
    zero = zero && entity_score(as_set(disjoint), as_set(s), emb).score == 0.0;
  }
  return {worst <= kEntityTol && identity && zero,
          fmt("%d pairs, max |lib - brute force| = %.2e, identity==1 %s, R=0 -> 0 %s", kEntityPairs, worst,
              identity ? "yes" : "no", zero ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

Outcome audio_ordering() {
  Rng rng(77);
  auto gauss = [&] {
    std::vector<double> v(kAudioDim);
    for (auto& x : v) x = rng.normal();
    return v;
  };
  // A shared direction g makes shuffled pairs partly aligned; u_i is the
  // clip identity; each modality view adds its own noise.
  const auto g = gauss();
  struct Triplet {
    EmbeddingVector a, v, t;
  };
  std::vector<Triplet> trip;
  for (int i = 0; i < kAudioTriplets; ++i) {
    const auto u = gauss();
    auto view = [&] {
      const auto n = gauss();
      std::vector<double> e(kAudioDim);
      for (std::size_t k = 0; k < kAudioDim; ++k) e[k] = g[k] + u[k] + 0.5 * n[k];
      return normalized(EmbeddingVector(e));
    };
    trip.push_back({view(), view(), view()});
  }
  std::vector<std::size_t> perm(trip.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i + 1) % perm.size();

  auto stats = [](const std::vector<double>& xs) {
    double m = 0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= static_cast<double>(xs.size() - 1);
    return std::pair{m, std::sqrt(v / static_cast<double>(xs.size()))};
  };
  std::vector<double> matched, shuffled, random;
  for (std::size_t i = 0; i < trip.size(); ++i) {
    matched.push_back(audio_score(trip[i].a, trip[i].v, trip[i].t).score);
    shuffled.push_back(audio_score(trip[perm[i]].a, trip[i].v, trip[i].t).score);
    random.push_back(audio_score(normalized(EmbeddingVector(gauss())), trip[i].v, trip[i].t).score);
  }
  const auto [mm, sm] = stats(matched);
  const auto [ms, ss] = stats(shuffled);
  const auto [mr, sr] = stats(random);
  const double z1 = (mm - ms) / std::hypot(sm, ss);
  const double z2 = (ms - mr) / std::hypot(ss, sr);
  return {z1 > kAudioSigmas && z2 > kAudioSigmas,
          fmt("matched %.6f > shuffled %.6f > random %.6f; separations %.1f and %.1f SE", mm, ms, mr, z1, z2)};
}

// ---------------------------------------------------------------------------

ModelConfig causality_config(MaskType t, int layers) {
  ModelConfig c;
  c.d_model = 16;
  c.layers = layers;
  c.heads = 2;
  c.n_text = 5;
  c.n_vision = 3;
  c.n_audio = 3;
  c.d_vision_in = 4;
  c.d_audio_in = 4;
  c.d_text_in = 6;
  c.vocab_size = 12;
  c.mask_type = t;
  c.seed = 13;
  c.init_std = 0.3;
  return c;
}

// For every key position k, perturb its input and record which hidden rows
// move. Forbidden (q, k) pairs must move by exactly 0; allowed pairs must
// move at all, so the check cannot pass vacuously.
Outcome mask_causality() {
  int forbidden = 0, leaked = 0, allowed = 0, dead = 0;
  for (auto t : {MaskType::I, MaskType::II, MaskType::III, MaskType::IV, MaskType::V}) {
    for (int layers : {1, 2}) {
      const auto c = causality_config(t, layers);
      const auto m = Model::create(c);
      const auto mask = m.default_mask();
      const auto reach = reachability(mask, layers);
      const auto layout = m.layout();
      std::vector<int> ids = {0, 6, 7, 8, 1};
      const auto feats = toy_features("causal", c);
      const Mat base = m.forward({&ids, &feats}, mask).hidden;
      for (int k = 0; k < layout.total(); ++k) {
        auto ids2 = ids;
        auto f2 = feats;
        switch (layout.modality_of(k)) {
          case Modality::text:
            ids2[static_cast<std::size_t>(k)] = 11;
            break;
          case Modality::vision:
            f2.vision.row(k - layout.span(Modality::vision).begin).array() += 1.0;
            break;
          case Modality::audio:
            f2.audio.row(k - layout.span(Modality::audio).begin).array() += 1.0;
            break;
        }
        const Mat moved = m.forward({&ids2, &f2}, mask).hidden;
        for (int q = 0; q < layout.total(); ++q) {
          const bool changed = (moved.row(q) - base.row(q)).cwiseAbs().maxCoeff() != 0.0;
          const bool ok = layers == 1 ? (mask.visible(q, k) || q == k) : reach.visible(q, k);
          if (!ok) {
            ++forbidden;
            if (changed) ++leaked;
          } else {
            ++allowed;
            if (!changed) ++dead;
          }
        }
      }
    }
  }
  return {leaked == 0 && dead == 0,
          fmt("types I-V at 1 and 2 layers: %d forbidden pairs, %d changed; %d allowed pairs, %d unchanged",
              forbidden, leaked, allowed, dead)};
}

Outcome gradient() {
  auto c = grad_config();
  auto m = Model::create(c);
  Rng rng(5);
  std::vector<Example> data = {random_example(c, rng, "a"), random_example(c, rng, "b")};
  std::vector<const Example*> batch = {&data[0], &data[1]};
  std::vector<MlmMasking> masking = {apply_mlm_masking(data[0].ids, 0.4, rng),
                                     apply_mlm_masking(data[1].ids, 0.4, rng)};
  const auto g = gradient_check(m, batch, masking, 0.6, 3, 17);
  return {g.checked >= kGradMinParams && g.worst < kGradTol,
          fmt("%zu parameters, worst relative error %.2e at %s", g.checked, g.worst, g.worst_name.c_str())};
}

Outcome lambda_endpoints() {
  auto c = grad_config();
  const auto m = Model::create(c);
  Rng rng(8);
  std::vector<Example> data = {random_example(c, rng, "a"), random_example(c, rng, "b")};
  std::vector<const Example*> batch = {&data[0], &data[1]};
  std::vector<MlmMasking> masking = {apply_mlm_masking(data[0].ids, 0.5, rng),
                                     apply_mlm_masking(data[1].ids, 0.5, rng)};
  const auto mask = m.default_mask();
  const auto l1 = combined_loss(m, batch, masking, 1.0, mask);
  const auto l0 = combined_loss(m, batch, masking, 0.0, mask);
  const bool ok = l1.total == l1.mlm && l0.total == l0.alm && !l1.mlm_empty && ModelConfig{}.lambda == 0.9;
  return {ok, fmt("lambda=1: %.17g vs mlm %.17g; lambda=0: %.17g vs alm %.17g; default %.2f", l1.total, l1.mlm,
                  l0.total, l0.alm, ModelConfig{}.lambda)};
}

Outcome mlm_rate() {
  Rng rng(99);
  std::vector<int> ids(1000);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = Vocabulary::kSpecialCount + static_cast<int>(i % 50);
  std::size_t masked = 0, eligible = 0;
  const double p = ModelConfig{}.mask_prob;
  while (eligible < kMlmPositions) {
    const auto m = apply_mlm_masking(ids, p, rng);
    masked += m.masked_count();
    eligible += ids.size();
  }
  const double rate = static_cast<double>(masked) / static_cast<double>(eligible);
  return {std::abs(rate - kMlmRate) <= kMlmTol && p == kMlmRate,
          fmt("%zu of %zu positions masked (rate %.4f)", masked, eligible, rate)};
}

Outcome overfit() {
  ModelConfig c;
  c.seed = kOverfitModelSeed;
  const auto ds = overfit_dataset(c);
  TrainConfig tc;
  tc.steps = kOverfitSteps;
  tc.batch_size = 8;
  tc.peak_lr = kOverfitPeakLr;
  tc.seed = kOverfitTrainSeed;
  const auto r = train_loop(ds.examples, c, ds.vocab, tc);
  if (r.diverged) return {false, "training diverged: " + r.divergence_reason};
  const double final_loss = r.losses.back().total;
  const Generator gen(r.checkpoint);
  int exact = 0;
  for (const auto& ex : ds.examples) {
    std::vector<int> target;
    for (std::size_t i = 1; i < ex.ids.size(); ++i) {
      target.push_back(ex.ids[i]);
      if (ex.ids[i] == Vocabulary::kEos) break;
    }
    if (gen.generate(ex.features).ids == target) ++exact;
  }
  return {final_loss < kOverfitLoss && exact >= kOverfitMinExact,
          fmt("final loss %.4f after %d steps, %d/8 exact generations", final_loss, kOverfitSteps, exact)};
}

Outcome metric_oracles() {
  std::ifstream in(data_path("toy3.json"));
  const auto j = nlohmann::json::parse(in);
  std::vector<Tokens> preds, refs;
  for (const auto& d : j) {
    preds.push_back(text::tokenize(d["pred"].get<std::string>()));
    refs.push_back(text::tokenize(d["ref"].get<std::string>()));
  }
  std::vector<std::vector<Tokens>> multi;
  for (const auto& r : refs) multi.push_back({r});
  const CiderScorer cider(multi);
  double worst = 0.0;
  bool identity = true;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& o = oracle::kToyDocs[i];
    for (int n = 1; n <= 4; ++n) worst = std::max(worst, std::abs(bleu(preds[i], {refs[i]}, n) - o.bleu[n - 1]));
    worst = std::max(worst, std::abs(rouge_l(preds[i], refs[i]) - o.rouge_l));
    worst = std::max(worst, std::abs(cider.score(preds[i], i) - o.cider));
    worst = std::max(worst, std::abs(cider.score(refs[i], i) - o.cider_identity));
    for (int n = 1; n <= 4; ++n) identity = identity && std::abs(bleu(refs[i], {refs[i]}, n) - 1.0) < 1e-12;
    identity = identity && std::abs(rouge_l(refs[i], refs[i]) - 1.0) < 1e-12;
    identity = identity && cider.score(refs[i], i) >= cider.score(preds[i], i);
  }
  for (int n = 1; n <= 4; ++n) {
    worst = std::max(worst, std::abs(corpus_bleu(preds, multi, n) - oracle::kToyCorpusBleu[n - 1]));
  }
  return {worst <= kMetricTol && identity,
          fmt("max deviation from oracle %.2e; identity maximal %s", worst, identity ? "yes" : "no")};
}

Outcome validator() {
  const auto adv = parse_annotations(data_path("adversarial6.json"));
  const std::vector<std::string_view> expected = {rule::kMinVisual, rule::kMinAudio,   rule::kSummarySentences,
                                                  rule::kZhMinChars, rule::kSpeculative, rule::kDuration};
  int caught = 0;
  for (std::size_t i = 0; i < adv.size() && i < expected.size(); ++i) {
    const auto rep = validate_record(adv[i]);
    if (rep.violations.size() == 1 && rep.violations[0].rule_id == expected[i]) ++caught;
  }
  int false_pos = 0;
  const auto clean = parse_annotations(data_path("fixture12.json"));
  for (const auto& r : clean) false_pos += static_cast<int>(validate_record(r).violations.size());
  return {caught == 6 && adv.size() == 6 && false_pos == 0,
          fmt("%d/6 adversarial records flagged with their rule only; %d violations on %zu clean records", caught,
              false_pos, clean.size())};
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  const auto dir = std::filesystem::temp_directory_path() / "favd_acceptance";
  std::filesystem::create_directories(dir);
  auto eval = [&](const std::string& out, const std::string& extra) {
    const std::string cmd = "\"" + cli + "\" eval --refs " + data_path("fixture12.json") + " --preds " +
                            data_path("fixture12_preds.jsonl") + " --media " + data_path("fixture12_media.json") +
                            " --external-scores " + data_path("fixture12_meteor.jsonl") +
                            " --metrics all,meteor --out " + (dir / out).string() + " " + extra + " > /dev/null";
    return std::system(cmd.c_str());
  };
  if (eval("a.json", "") != 0 || eval("b.json", "") != 0) return {false, "favd eval failed"};
  if (eval("c.json", "--timestamp 2026-01-01T00:00:00Z") != 0 ||
      eval("d.json", "--timestamp 2026-01-01T00:00:00Z") != 0) {
    return {false, "favd eval failed"};
  }
  static const std::regex stamp("\"timestamp\": \"[^\"]*\"");
  const auto a = std::regex_replace(slurp((dir / "a.json").string()), stamp, "\"timestamp\": \"\"");
  const auto b = std::regex_replace(slurp((dir / "b.json").string()), stamp, "\"timestamp\": \"\"");
  const auto c = slurp((dir / "c.json").string());
  const auto d = slurp((dir / "d.json").string());
  std::filesystem::remove_all(dir);
  const bool ok = !a.empty() && a == b && !c.empty() && c == d;
  return {ok, fmt("%zu-byte reports; equal modulo timestamp %s; equal with fixed timestamp %s", c.size(),
                  a == b ? "yes" : "no", c == d ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: favd_acceptance <path to favd>\n");
    return 2;
  }
  const std::string cli = argv[1];

  run("gompertz-endpoints", 1, [] {
    const double one = gompertz(1.0), zero = gompertz(0.0);
    return Outcome{std::abs(one - 1.0) <= kGompertzOneTol && std::abs(zero - 0.5) <= kGompertzZeroTol,
                   fmt("f(1) = %.8f, f(0) = %.8f", one, zero)};
  });
  run("entityscore-oracle", 5, entity_suite);
  run("audioscore-ordering", 10, audio_ordering);
  run("mask-causality", 30, mask_causality);
  run("gradient-check", 60, gradient);
  run("lambda-endpoints", 5, lambda_endpoints);
  run("mlm-rate", 5, mlm_rate);
  run("overfit", 300, overfit);
  run("metric-oracles", 5, metric_oracles);
  run("validator-fixtures", 5, validator);
  run("eval-determinism", 60, [&] { return determinism(cli); });

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
