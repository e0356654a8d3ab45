// hshctl: generate datasets, cluster, sweep and replay experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hsh/hsh.hpp"

namespace {

using hsh::ExperimentSpec;

// "20,25,30" or "20:40:5" (inclusive).
std::vector<int> parse_values(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  try {
    if (text.find(':') != std::string::npos) {
      std::stringstream ss(text);
      std::string a, b, c;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, c, ':');
      const int lo = std::stoi(a), hi = std::stoi(b), step = c.empty() ? 1 : std::stoi(c);
      if (step <= 0) throw hsh::UsageError("range step must be positive");
      for (int v = lo; v <= hi; v += step) out.push_back(v);
      return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(std::stoi(item));
  } catch (const std::logic_error&) {
    throw hsh::UsageError("cannot parse --values '" + text + "'");
  }
  return out;
}

void add_common(CLI::App* cmd, ExperimentSpec& spec, std::string& method) {
  cmd->add_option("--dataset", spec.dataset, "matrix file (whitespace grid or .csv)");
  cmd->add_option("--preset", spec.preset, "generator preset: paper-synthetic, dynamic-99, planted-9");
  cmd->add_option("--k", spec.k, "cluster count");
  cmd->add_option("--landmarks", spec.landmarks, "landmark count");
  cmd->add_option("--seed", spec.seed, "random seed");
  cmd->add_option("--restarts", spec.restarts, "NMF / K-means restarts");
  cmd->add_option("--out", spec.out, "output directory");
  cmd->add_option("--method", method, "hsh, centralized, svd, vivaldi, origin (comma list where allowed)");
  cmd->add_option("--max-iters", spec.max_iters, "NMF iteration cap");
  cmd->add_option("--rel-tol", spec.rel_tol, "NMF relative stopping tolerance");
  cmd->add_option("--rank", spec.svd_rank, "embedding rank for the svd method (default K)");
  cmd->add_option("--dim", spec.vivaldi_dim, "vivaldi coordinate dimension");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw hsh::IoError("cannot create " + dir + ": " + ec.message());
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw hsh::IoError("cannot write " + p.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical symmetric NMF clustering of network distance matrices"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string method = "hsh";
  std::string format = "json";
  int frames = 688;

  auto* gen = app.add_subcommand("generate", "write a preset dataset");
  std::string preset;
  gen->add_option("--preset", preset, "paper-synthetic, dynamic-99, planted-9")->required();
  gen->add_option("--seed", spec.seed, "random seed");
  gen->add_option("--out", spec.out, "output directory");
  gen->add_option("--frames", frames, "frame count for dynamic-99");

  auto* cluster = app.add_subcommand("cluster", "cluster one dataset with one method");
  add_common(cluster, spec, method);
  cluster->add_option("--format", format, "stdout format")->check(CLI::IsMember({"json", "csv"}));

  auto* sweep = app.add_subcommand("sweep", "landmark or cluster-count sweep");
  add_common(sweep, spec, method);
  std::string sweep_kind, values_text;
  int seeds = 1;
  sweep->add_option("--sweep", sweep_kind, "landmarks or clusters")->required();
  sweep->add_option("--values", values_text, "comma list or lo:hi:step")->required();
  sweep->add_option("--seeds", seeds, "number of consecutive seeds");
  sweep->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));

  auto* replay = app.add_subcommand("replay", "per-frame metrics over a matrix sequence");
  std::string sequence;
  add_common(replay, spec, method);
  replay->add_option("--sequence", sequence, "directory of frame files")->required();
  replay->add_option("--frames", frames, "only the first N frames (0 = all)");
  replay->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue spectrum as CSV");
  add_common(spectrum, spec, method);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      for (const auto& f : hsh::cmd_generate(preset, spec.seed, spec.out, frames)) std::cout << f << '\n';
      return 0;
    }
    if (*cluster) {
      spec.method = hsh::parse_method(method);
      const auto j = hsh::cmd_cluster(spec);
      if (format == "json") {
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << "node,label\n";
        const auto labels = j["labels"].get<hsh::Labels>();
        for (std::size_t i = 0; i < labels.size(); ++i) std::cout << i << ',' << labels[i] << '\n';
      }
      return 0;
    }
    if (*sweep) {
      const auto methods = hsh::parse_methods(method);
      const auto kind = hsh::parse_sweep(sweep_kind);
      const auto rows = hsh::cmd_sweep(spec, methods, kind, parse_values(values_text), seeds);
      ensure_dir(spec.out);
      std::ostringstream csv;
      hsh::write_sweep_csv(csv, kind, rows);
      write_file(std::filesystem::path(spec.out) / "sweep.csv", csv.str());
      if (format == "csv") {
        std::cout << csv.str();
      } else {
        auto arr = nlohmann::json::array();
        for (const auto& r : rows)
          arr.push_back({{"method", r.method},
                         {sweep_kind, r.value},
                         {"seed", r.seed},
                         {"median_silhouette", r.median_silhouette},
                         {"silhouette_ci", {r.silhouette_ci_low, r.silhouette_ci_high}},
                         {"median_gain", hsh::detail::number_or_null(r.median_gain)},
                         {"gain_ci", {hsh::detail::number_or_null(r.gain_ci_low),
                                      hsh::detail::number_or_null(r.gain_ci_high)}},
                         {"timings", {{"method_seconds", r.seconds}}}});
        std::cout << arr.dump(2) << '\n';
      }
      return 0;
    }
    if (*replay) {
      if (replay->count("--method") == 0) method = "hsh,centralized";
      if (replay->count("--k") == 0) spec.k = 3;
      if (replay->count("--landmarks") == 0) spec.landmarks = 30;
      const auto rows = hsh::cmd_replay(sequence, spec, hsh::parse_methods(method), frames);
      ensure_dir(spec.out);
      std::ostringstream csv;
      hsh::write_replay_csv(csv, rows);
      write_file(std::filesystem::path(spec.out) / "replay.csv", csv.str());
      if (format == "csv") {
        std::cout << csv.str();
      } else {
        auto arr = nlohmann::json::array();
        for (const auto& r : rows)
          arr.push_back({{"frame", r.frame},
                         {"method", r.method},
                         {"median_silhouette", r.median_silhouette},
                         {"median_gain", hsh::detail::number_or_null(r.median_gain)}});
        std::cout << arr.dump(2) << '\n';
      }
      return 0;
    }
    if (*spectrum) {
      const auto ds = hsh::resolve_dataset(spec);
      const auto emb = hsh::eigendecompose(ds.distances, ds.distances.size());
      ensure_dir(spec.out);
      std::ostringstream csv;
      hsh::write_spectrum_csv(csv, emb);
      write_file(std::filesystem::path(spec.out) / "spectrum.csv", csv.str());
      std::cout << csv.str();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "hshctl: " << e.what() << '\n';
    return hsh::exit_code_for(e);
  }
  return 1;
}
