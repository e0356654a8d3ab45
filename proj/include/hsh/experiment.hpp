#pragma once

// Experiment drivers behind the hshctl command line: dataset presets,
// method dispatch, result JSON and CSV outputs, sweeps and replays.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "hsh/baselines.hpp"
#include "hsh/datagen.hpp"
#include "hsh/matrix.hpp"
#include "hsh/metrics.hpp"
#include "hsh/pipeline.hpp"
#include "hsh/spectral.hpp"
#include "hsh/symnmf.hpp"

namespace hsh {

class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

enum class Method { hsh, centralized, svd, vivaldi, origin };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::hsh: return "hsh";
    case Method::centralized: return "centralized";
    case Method::svd: return "svd";
    case Method::vivaldi: return "vivaldi";
    case Method::origin: return "origin";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::hsh, Method::centralized, Method::svd, Method::vivaldi, Method::origin})
    if (to_string(m) == s) return m;
  throw UsageError("unknown method '" + s + "'");
}

inline std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_method(item));
  if (out.empty()) throw UsageError("no method given");
  return out;
}

struct ExperimentSpec {
  Method method = Method::hsh;
  std::string dataset;  // path to a matrix file
  std::string preset;   // generator preset, used when dataset is empty
  int k = 4;
  int landmarks = 25;
  std::uint64_t seed = 0;
  int restarts = 20;
  std::string out = ".";
  // Method knobs.
  int max_iters = 500;
  double rel_tol = 1e-6;
  int svd_rank = 0;  // 0 selects K
  int vivaldi_dim = 4;
  int vivaldi_iters = 200;

  void validate(Index n = -1) const {
    if (k < 2) throw UsageError("--k must be >= 2");
    if ((method == Method::hsh || method == Method::vivaldi) && landmarks < k)
      throw UsageError("--landmarks must be >= --k for landmark methods");
    if (restarts < 1) throw UsageError("--restarts must be >= 1");
    if (n >= 0) {
      if (k > n) throw UsageError("--k exceeds the node count (" + std::to_string(n) + ")");
      if ((method == Method::hsh || method == Method::vivaldi) && landmarks > n)
        throw UsageError("--landmarks exceeds the node count (" + std::to_string(n) + ")");
    }
  }

  FactorizeConfig factorize_config() const {
    FactorizeConfig cfg;
    cfg.max_iters = max_iters;
    cfg.rel_tol = rel_tol;
    cfg.restarts = restarts;
    cfg.seed = seed;
    return cfg;
  }
};

struct Dataset {
  std::string name;
  DistanceMatrix distances;
  std::optional<Matrix> points;
  Labels truth_labels;
};

inline const std::vector<std::string>& known_presets() {
  static const std::vector<std::string> names{"paper-synthetic", "dynamic-99", "planted-9"};
  return names;
}

inline Dataset make_preset(const std::string& name, std::uint64_t seed) {
  PlantedDataset p;
  if (name == "paper-synthetic")
    p = paper_synthetic(seed);
  else if (name == "dynamic-99")
    p = dynamic_base(seed);
  else if (name == "planted-9")
    p = planted_latency(3, {3, 3, 3}, {1.0, 2.0}, {10.0, 12.0}, seed);
  else
    throw UsageError("unknown preset '" + name + "'");
  Dataset ds{name, std::move(p.distances), std::nullopt, std::move(p.truth_labels)};
  if (p.points.size() > 0) ds.points = std::move(p.points);
  return ds;
}

namespace detail {

inline std::filesystem::path sidecar_path(const std::filesystem::path& matrix_path) {
  auto p = matrix_path;
  return p.replace_extension(".json");
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failure on " + p.string());
}

inline nlohmann::json matrix_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// NaN and infinity have no JSON spelling; they become null.
inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace detail

/// Loads a matrix file plus its optional ".json" sidecar (truth labels, points).
inline Dataset load_dataset(const std::string& path) {
  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  ds.distances = load_matrix(path, format_for_path(path));
  const auto sidecar = detail::sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    const auto meta = nlohmann::json::parse(detail::read_text(sidecar), nullptr, false);
    if (meta.is_discarded()) throw FormatError("malformed sidecar " + sidecar.string());
    if (meta.contains("truth_labels")) ds.truth_labels = meta["truth_labels"].get<Labels>();
    if (meta.contains("points_file")) {
      const auto pts = std::filesystem::path(path).parent_path() / meta["points_file"].get<std::string>();
      ds.points = load_grid(pts.string());
      if (ds.points->rows() != ds.distances.size())
        throw FormatError("points file row count does not match the matrix");
    }
  }
  return ds;
}

inline Dataset resolve_dataset(const ExperimentSpec& spec) {
  if (!spec.dataset.empty()) return load_dataset(spec.dataset);
  if (!spec.preset.empty()) return make_preset(spec.preset, spec.seed);
  throw UsageError("one of --dataset or --preset is required");
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct MethodRun {
  ClusteringResult result;
  double seconds = 0.0;
};

inline MethodRun run_method(const ExperimentSpec& spec, const Dataset& ds) {
  spec.validate(ds.distances.size());
  const auto cfg = spec.factorize_config();
  const auto t0 = std::chrono::steady_clock::now();
  MethodRun run;
  switch (spec.method) {
    case Method::hsh: {
      const auto lm = select_landmarks(ds.distances.size(), spec.landmarks, spec.seed);
      const auto res = run_hsh(extract_observation(ds.distances, lm), spec.k, cfg);
      run.result = to_clustering_result(res, spec.restarts);
      break;
    }
    case Method::centralized:
      run.result = centralized_nmf(ds.distances, spec.k, cfg);
      break;
    case Method::svd:
      run.result = svd_kmeans(ds.distances, spec.svd_rank > 0 ? spec.svd_rank : spec.k, spec.k, cfg);
      break;
    case Method::vivaldi: {
      const auto lm = select_landmarks(ds.distances.size(), spec.landmarks, spec.seed);
      VivaldiConfig v;
      v.dim = spec.vivaldi_dim;
      v.iters = spec.vivaldi_iters;
      v.seed = spec.seed;
      run.result = vivaldi_kmeans(extract_observation(ds.distances, lm), spec.k, v, spec.restarts);
      break;
    }
    case Method::origin:
      if (!ds.points) throw UsageError("method 'origin' needs point coordinates (generator data)");
      run.result = origin_kmeans(*ds.points, spec.k, spec.restarts, spec.seed);
      break;
  }
  run.seconds = seconds_since(t0);
  return run;
}

inline nlohmann::json spec_json(const ExperimentSpec& spec) {
  return {{"method", to_string(spec.method)},
          {"dataset", spec.dataset},
          {"preset", spec.preset},
          {"k", spec.k},
          {"landmarks", spec.landmarks},
          {"seed", spec.seed},
          {"restarts", spec.restarts},
          {"max_iters", spec.max_iters},
          {"rel_tol", spec.rel_tol}};
}

inline nlohmann::json validity_json(const ValidityReport& v) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < v.clusters.size(); ++i) {
    const auto& c = v.clusters[i];
    arr.push_back({{"cluster", i},
                   {"diagonal", c.diagonal},
                   {"max_offdiagonal", c.max_offdiagonal},
                   {"gap", c.gap},
                   {"separated", c.separated}});
  }
  return arr;
}

/// {schema_version, spec, labels, landmark_indices, s_matrix, validity,
///  objective, timings, metrics}.
inline nlohmann::json result_json(const ExperimentSpec& spec, const MethodRun& run, const QualityReport& q) {
  const auto& r = run.result;
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["spec"] = spec_json(spec);
  j["labels"] = r.labels;
  j["landmark_indices"] = r.landmark_indices;
  j["s_matrix"] = r.s_matrix ? detail::matrix_json(*r.s_matrix) : nlohmann::json(nullptr);
  j["validity"] = validity_json(r.validity);
  j["objective"] = r.objective ? nlohmann::json(*r.objective) : nlohmann::json(nullptr);
  if (r.embedding_error) j["embedding_error"] = *r.embedding_error;
  j["metrics"] = {
      {"median_silhouette", q.silhouette_summary.median},
      {"silhouette_ci", {q.silhouette_summary.ci_low, q.silhouette_summary.ci_high}},
      {"median_gain", detail::number_or_null(q.gain_summary.median)},
      {"gain_ci", {detail::number_or_null(q.gain_summary.ci_low), detail::number_or_null(q.gain_summary.ci_high)}},
      {"gain_excluded", q.gain_excluded}};
  j["timings"] = {{"method_seconds", run.seconds}};
  return j;
}

// ---------------------------------------------------------------------------
// Commands

/// Writes a preset to `out`: matrix grid + JSON sidecar (+ points grid), or,
/// for dynamic-99, a directory of 688 frames with a sequence.json.
inline std::vector<std::string> cmd_generate(const std::string& preset, std::uint64_t seed,
                                             const std::string& out, int frames = 688) {
  namespace fs = std::filesystem;
  const auto ds = make_preset(preset, seed);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out + ": " + ec.message());
  std::vector<std::string> written;

  if (preset == "dynamic-99") {
    const double jitter = 0.1, churn = 0.0;
    const auto seq = dynamic_sequence(ds.distances, frames, jitter, churn, seed);
    const fs::path dir = fs::path(out) / preset;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    nlohmann::json meta{{"preset", preset},
                        {"seed", seed},
                        {"frames", frames},
                        {"nodes", ds.distances.size()},
                        {"frame_interval_seconds", seq.frame_interval_seconds},
                        {"jitter_fraction", jitter},
                        {"churn_rate", churn},
                        {"truth_labels", ds.truth_labels}};
    auto files = nlohmann::json::array();
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
      std::ostringstream name;
      name << "frame_" << std::setw(4) << std::setfill('0') << t << ".txt";
      write_matrix((dir / name.str()).string(), seq.frames[t], GridFormat::whitespace_grid);
      files.push_back(name.str());
      written.push_back((dir / name.str()).string());
    }
    meta["files"] = files;
    detail::write_text(dir / "sequence.json", meta.dump(2) + "\n");
    written.push_back((dir / "sequence.json").string());
    return written;
  }

  const fs::path matrix = fs::path(out) / (preset + ".txt");
  write_matrix(matrix.string(), ds.distances, GridFormat::whitespace_grid);
  written.push_back(matrix.string());
  nlohmann::json meta{{"preset", preset},
                      {"seed", seed},
                      {"nodes", ds.distances.size()},
                      {"truth_labels", ds.truth_labels}};
  if (ds.points) {
    const fs::path pts = fs::path(out) / (preset + ".points.txt");
    write_grid(pts.string(), *ds.points);
    meta["points_file"] = pts.filename().string();
    written.push_back(pts.string());
  }
  const auto sidecar = detail::sidecar_path(matrix);
  detail::write_text(sidecar, meta.dump(2) + "\n");
  written.push_back(sidecar.string());
  return written;
}

inline void write_cdf_file(const std::filesystem::path& p, const std::vector<double>& sorted) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  write_cdf(out, sorted);
}

/// Runs one method and writes result.json, silhouette_cdf.csv, gain_cdf.csv
/// and, for NMF methods, s_matrix.csv.
inline nlohmann::json cmd_cluster(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  const auto ds = resolve_dataset(spec);
  const auto run = run_method(spec, ds);
  const auto q = evaluate(ds.distances, run.result.labels, spec.seed);
  const auto j = result_json(spec, run, q);
  std::error_code ec;
  fs::create_directories(spec.out, ec);
  if (ec) throw IoError("cannot create " + spec.out);
  const fs::path dir(spec.out);
  detail::write_text(dir / "result.json", j.dump(2) + "\n");
  write_cdf_file(dir / "silhouette_cdf.csv", q.silhouette_summary.cdf_samples);
  write_cdf_file(dir / "gain_cdf.csv", q.gain_summary.cdf_samples);
  if (run.result.s_matrix) write_grid((dir / "s_matrix.csv").string(), *run.result.s_matrix, GridFormat::csv);
  return j;
}

enum class SweepKind { landmarks, clusters };

inline SweepKind parse_sweep(const std::string& s) {
  if (s == "landmarks") return SweepKind::landmarks;
  if (s == "clusters") return SweepKind::clusters;
  throw UsageError("unknown sweep '" + s + "' (expected landmarks or clusters)");
}

struct SweepRow {
  std::string method;
  int value = 0;
  std::uint64_t seed = 0;
  double median_silhouette = 0.0;
  double silhouette_ci_low = 0.0;
  double silhouette_ci_high = 0.0;
  double median_gain = 0.0;
  double gain_ci_low = 0.0;
  double gain_ci_high = 0.0;
  double seconds = 0.0;
};

inline void write_sweep_csv(std::ostream& out, SweepKind kind, const std::vector<SweepRow>& rows) {
  out << "method," << (kind == SweepKind::landmarks ? "landmarks" : "clusters")
      << ",seed,median_silhouette,silhouette_ci_low,silhouette_ci_high,median_gain,gain_ci_low,gain_ci_high,"
         "seconds\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.value << ',' << r.seed << ',' << format_double(r.median_silhouette) << ','
        << format_double(r.silhouette_ci_low) << ',' << format_double(r.silhouette_ci_high) << ','
        << format_double(r.median_gain) << ',' << format_double(r.gain_ci_low) << ','
        << format_double(r.gain_ci_high) << ',' << format_double(r.seconds) << '\n';
}

/// One row per (method, value, seed), sorted in that order. Seeds run from
/// spec.seed to spec.seed + seeds - 1; presets are regenerated per seed.
inline std::vector<SweepRow> cmd_sweep(const ExperimentSpec& base, const std::vector<Method>& methods,
                                       SweepKind kind, const std::vector<int>& values, int seeds = 1) {
  if (values.empty()) throw UsageError("--values must list at least one value");
  if (methods.empty()) throw UsageError("no method given");
  if (seeds < 1) throw UsageError("--seeds must be >= 1");
  std::vector<SweepRow> rows;
  for (int s = 0; s < seeds; ++s) {
    ExperimentSpec seeded = base;
    seeded.seed = base.seed + static_cast<std::uint64_t>(s);
    const auto ds = resolve_dataset(seeded);
    for (Method m : methods)
      for (int v : values) {
        ExperimentSpec spec = seeded;
        spec.method = m;
        (kind == SweepKind::landmarks ? spec.landmarks : spec.k) = v;
        const auto run = run_method(spec, ds);
        const auto q = evaluate(ds.distances, run.result.labels, spec.seed);
        rows.push_back({to_string(m), v, spec.seed, q.silhouette_summary.median, q.silhouette_summary.ci_low,
                        q.silhouette_summary.ci_high, q.gain_summary.median, q.gain_summary.ci_low,
                        q.gain_summary.ci_high, run.seconds});
      }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.method, a.value, a.seed) < std::tie(b.method, b.value, b.seed);
  });
  return rows;
}

struct ReplayRow {
  int frame = 0;
  std::string method;
  double median_silhouette = 0.0;
  double median_gain = 0.0;
};

/// Frame file names listed in sequence.json, else every frame_*.txt sorted.
inline std::vector<std::filesystem::path> sequence_frames(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("sequence directory not found: " + dir);
  std::vector<fs::path> frames;
  const fs::path meta_path = fs::path(dir) / "sequence.json";
  if (fs::exists(meta_path)) {
    const auto meta = nlohmann::json::parse(detail::read_text(meta_path), nullptr, false);
    if (meta.is_discarded() || !meta.contains("files")) throw FormatError("malformed " + meta_path.string());
    for (const auto& f : meta["files"]) frames.push_back(fs::path(dir) / f.get<std::string>());
  } else {
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (name.rfind("frame_", 0) == 0) frames.push_back(e.path());
    }
    std::sort(frames.begin(), frames.end());
  }
  for (const auto& f : frames)
    if (!fs::exists(f)) throw IoError("missing frame file " + f.string());
  if (frames.empty()) throw IoError("no frames in " + dir);
  return frames;
}

/// One row per (frame, method) with per-frame median silhouette and gain.
inline std::vector<ReplayRow> cmd_replay(const std::string& dir, const ExperimentSpec& base,
                                         const std::vector<Method>& methods, int max_frames = 0) {
  auto frames = sequence_frames(dir);
  if (max_frames > 0 && static_cast<int>(frames.size()) > max_frames) frames.resize(max_frames);
  std::vector<ReplayRow> rows;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    Dataset ds;
    ds.name = frames[t].filename().string();
    ds.distances = load_matrix(frames[t].string(), format_for_path(frames[t].string()));
    for (Method m : methods) {
      ExperimentSpec spec = base;
      spec.method = m;
      const auto run = run_method(spec, ds);
      const auto q = evaluate(ds.distances, run.result.labels, spec.seed);
      rows.push_back({static_cast<int>(t), to_string(m), q.silhouette_summary.median, q.gain_summary.median});
    }
  }
  return rows;
}

inline void write_replay_csv(std::ostream& out, const std::vector<ReplayRow>& rows) {
  out << "frame,method,median_silhouette,median_gain\n";
  for (const auto& r : rows)
    out << r.frame << ',' << r.method << ',' << format_double(r.median_silhouette) << ','
        << format_double(r.median_gain) << '\n';
}

/// Eigenvalue spectrum as CSV: "index,eigenvalue,signature".
inline void write_spectrum_csv(std::ostream& out, const SignedEmbedding& emb) {
  out << "index,eigenvalue,signature\n";
  for (Index k = 0; k < emb.rank(); ++k)
    out << k << ',' << format_double(emb.eigenvalues(k)) << ',' << static_cast<int>(emb.signature(k)) << '\n';
}

/// Process exit status per error class.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const FormatError*>(&e)) return 4;
  if (dynamic_cast<const ValueError*>(&e) || dynamic_cast<const IndexError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const SizeError*>(&e))
    return 5;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const SingularError*>(&e) ||
      dynamic_cast<const DegenerateError*>(&e))
    return 6;
  return 1;
}

}  // namespace hsh
