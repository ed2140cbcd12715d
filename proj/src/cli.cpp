#include "chordvec/cli.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "chordvec/analysis.h"
#include "chordvec/attribute_prediction.h"
#include "chordvec/chord.h"
#include "chordvec/corpus.h"
#include "chordvec/embeddings.h"
#include "chordvec/evaluation.h"
#include "chordvec/next_chord_lm.h"
#include "chordvec/representations.h"
#include "chordvec/service.h"
#include "chordvec/synthetic.h"

namespace chordvec {

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string format = "csv";
  std::string log_level = "info";
};

// Provenance record written next to the outputs of every run.
struct Provenance {
  std::string command;
  std::vector<std::string> argv;
  Json options = Json::object();
  Json inputs = Json::object();
  std::vector<std::string> outputs;

  void input(const std::string& path) { inputs[path] = file_digest(path); }

  void write(const Globals& g) const {
    Json j;
    j["tool"] = "chordvec";
    j["version"] = kVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["seed"] = g.seed;
    j["options"] = options;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
                      {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                                     std::to_string(SPDLOG_VER_PATCH)},
                      {"compiler", __VERSION__}};
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["created"] = stamp;
    fs::create_directories(g.out_dir);
    std::ofstream out(fs::path(g.out_dir) / (command + ".provenance.json"), std::ios::binary);
    out << j.dump(2) << '\n';
  }
};

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

std::vector<std::string> split_progression(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void check_chords(const std::vector<std::string>& chords) {
  for (const auto& c : chords) parse_chord(c);
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

Quality parse_quality_name(const std::string& name) {
  if (name == "major") return Quality::major;
  if (name == "minor") return Quality::minor;
  throw ConfigError("quality must be major or minor");
}

void print_suggestions(std::ostream& out, const std::vector<std::pair<std::string, double>>& s) {
  for (std::size_t i = 0; i < s.size(); ++i) out << (i + 1) << ". " << s[i].first << "  " << fmt(s[i].second, "%.4f") << '\n';
}

// Working-progression loop: a line with several chords starts a new
// progression, a number picks that suggestion, a single chord is appended.
void interactive_predict(const LMModel& model, std::size_t k, std::vector<std::string> progression, std::istream& in,
                         std::ostream& out) {
  std::vector<std::pair<std::string, double>> current;
  auto show = [&] {
    current = predict_next(model, progression, k);
    out << "progression: " << join(progression, " ") << '\n';
    print_suggestions(out, current);
  };
  if (!progression.empty()) show();
  out << "> " << std::flush;
  std::string line;
  while (std::getline(in, line)) {
    const auto tokens = split_progression(line);
    if (tokens.empty() || tokens[0] == "q" || tokens[0] == "quit") break;
    try {
      if (tokens.size() > 1) {
        check_chords(tokens);
        progression = tokens;
      } else if (std::all_of(tokens[0].begin(), tokens[0].end(), ::isdigit)) {
        const std::size_t pick = std::stoul(tokens[0]);
        if (pick < 1 || pick > current.size()) {
          out << "pick a number between 1 and " << current.size() << '\n';
          out << "> " << std::flush;
          continue;
        }
        progression.push_back(current[pick - 1].first);
      } else {
        check_chords(tokens);
        progression.push_back(tokens[0]);
      }
      show();
    } catch (const ParseError& e) {
      out << "cannot parse: " << e.what() << '\n';
    }
    out << "> " << std::flush;
  }
  out << '\n';
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("chordvec", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::from_str(level));
  return logger;
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"chordvec: chord embeddings, next-chord models and attribute classifiers"};
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for outputs and provenance records")->capture_default_str();
  app.add_option("--format", g.format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();
  app.require_subcommand(1);

  Provenance prov;
  for (int i = 0; i < argc; ++i) prov.argv.emplace_back(argv[i]);
  std::function<void()> action;

  // ingest
  std::string ingest_in, ingest_out, ingest_meta;
  std::size_t ingest_min = 6;
  auto* ingest = app.add_subcommand("ingest", "Load a corpus, drop short songs and attach metadata");
  ingest->add_option("--input", ingest_in, "Corpus (JSON lines)")->required();
  ingest->add_option("--output", ingest_out, "Cleaned corpus")->required();
  ingest->add_option("--metadata", ingest_meta, "Artist metadata (JSON lines)");
  ingest->add_option("--min-chords", ingest_min, "Minimum chords per song")->capture_default_str();
  ingest->callback([&] {
    action = [&] {
      prov.input(ingest_in);
      Corpus c = load_corpus(ingest_in);
      const std::size_t before = c.size();
      c = filter_min_chords(c, ingest_min);
      if (!ingest_meta.empty()) {
        prov.input(ingest_meta);
        c = join_metadata(c, ingest_meta);
      }
      save_corpus(c, ingest_out);
      prov.outputs.push_back(ingest_out);
      prov.options = {{"min_chords", ingest_min}};
      out << "kept " << c.size() << " of " << before << " songs\n";
    };
  });

  // dedup
  std::string dedup_in, dedup_out;
  double dedup_threshold = 0.9;
  auto* dedup_cmd = app.add_subcommand("dedup", "Remove near-duplicate songs (chord-trigram Jaccard)");
  dedup_cmd->add_option("--input", dedup_in)->required();
  dedup_cmd->add_option("--output", dedup_out)->required();
  dedup_cmd->add_option("--threshold", dedup_threshold)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  dedup_cmd->callback([&] {
    action = [&] {
      prov.input(dedup_in);
      const DedupResult r = dedup(load_corpus(dedup_in), dedup_threshold);
      save_corpus(r.corpus, dedup_out);
      prov.outputs.push_back(dedup_out);
      prov.options = {{"threshold", dedup_threshold}};
      out << "removed " << r.removed << " songs, kept " << r.corpus.size() << '\n';
    };
  });

  // stats
  std::string stats_in;
  std::size_t stats_top = 61;
  auto* stats = app.add_subcommand("stats", "Chord song-frequency ranks and power-law fit");
  stats->add_option("--input", stats_in)->required();
  stats->add_option("--top", stats_top, "Ranks to report and fit")->capture_default_str();
  stats->callback([&] {
    action = [&] {
      prov.input(stats_in);
      const Corpus c = load_corpus(stats_in);
      const auto ranks = song_frequency_ranks(c);
      const std::size_t n = std::min(stats_top, ranks.size());
      const PowerLawFit fit = fit_power_law(ranks, n);
      const std::string path = out_path(g, g.format == "json" ? "ranks.json" : "ranks.csv");
      std::ofstream f(path, std::ios::binary);
      if (g.format == "json") {
        Json j;
        j["songs"] = c.size();
        j["ranks"] = Json::array();
        for (std::size_t i = 0; i < n; ++i) j["ranks"].push_back({{"rank", i + 1}, {"chord", ranks[i].first}, {"songs", ranks[i].second}});
        j["power_law"] = {{"a", fit.a}, {"b", fit.b}, {"r_squared", fit.r_squared}, {"degenerate", fit.degenerate}};
        f << j.dump(2) << '\n';
        out << j.dump(2) << '\n';
      } else {
        f << "rank,chord,songs\n";
        for (std::size_t i = 0; i < n; ++i) f << i + 1 << ',' << ranks[i].first << ',' << ranks[i].second << '\n';
        out << "rank  chord         songs\n";
        for (std::size_t i = 0; i < n; ++i) {
          char line[80];
          std::snprintf(line, sizeof(line), "%4zu  %-12s %6zu\n", i + 1, ranks[i].first.c_str(), ranks[i].second);
          out << line;
        }
        out << "power law: songs = " << fmt(fit.a, "%.4g") << " * rank^" << fmt(fit.b, "%.4f")
            << "  r^2 = " << fmt(fit.r_squared, "%.4f") << (fit.degenerate ? " (degenerate)" : "") << '\n';
      }
      prov.outputs.push_back(path);
      prov.options = {{"top", stats_top}};
    };
  });

  // gen-synthetic
  std::string gen_out, gen_label = "gender", gen_a = "male", gen_b = "female";
  std::size_t gen_songs = 5000, gen_min = 8, gen_max = 32;
  double gen_skew = -1.0;
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic diatonic corpus");
  gen->add_option("--output", gen_out)->required();
  gen->add_option("--songs", gen_songs)->capture_default_str();
  gen->add_option("--min-length", gen_min)->capture_default_str();
  gen->add_option("--max-length", gen_max)->capture_default_str();
  gen->add_option("--skew", gen_skew, "Label songs and skew chord qualities per class");
  gen->add_option("--label", gen_label)->capture_default_str();
  gen->add_option("--class-a", gen_a)->capture_default_str();
  gen->add_option("--class-b", gen_b)->capture_default_str();
  gen->callback([&] {
    action = [&] {
      SyntheticConfig cfg;
      cfg.min_length = gen_min;
      cfg.max_length = gen_max;
      if (gen_skew >= 0) cfg.labels = QualitySkew{gen_label, gen_a, gen_b, gen_skew};
      const Corpus c = generate_synthetic_corpus(g.seed, gen_songs, cfg);
      save_corpus(c, gen_out);
      prov.outputs.push_back(gen_out);
      prov.options = {{"songs", gen_songs}, {"min_length", gen_min}, {"max_length", gen_max}, {"skew", gen_skew}};
      out << "wrote " << c.size() << " songs to " << gen_out << '\n';
    };
  });

  // train-emb
  std::string emb_in, emb_out, emb_mode = "skipgram";
  EmbeddingConfig emb_cfg;
  double emb_df = 0.001;
  auto* train_emb = app.add_subcommand("train-emb", "Train chord embeddings (word2vec negative sampling)");
  train_emb->add_option("--input", emb_in)->required();
  train_emb->add_option("--output", emb_out, "Vector file")->required();
  train_emb->add_option("--mode", emb_mode)->check(CLI::IsMember({"cbow", "skipgram"}))->capture_default_str();
  train_emb->add_option("--dim", emb_cfg.dim)->capture_default_str();
  train_emb->add_option("--window", emb_cfg.window)->capture_default_str();
  train_emb->add_option("--negatives", emb_cfg.negatives)->capture_default_str();
  train_emb->add_option("--epochs", emb_cfg.epochs)->capture_default_str();
  train_emb->add_option("--lr", emb_cfg.initial_lr)->capture_default_str();
  train_emb->add_option("--df-threshold", emb_df, "Vocabulary document-frequency threshold")->capture_default_str();
  train_emb->callback([&] {
    action = [&] {
      prov.input(emb_in);
      emb_cfg.mode = emb_mode == "cbow" ? EmbeddingMode::cbow : EmbeddingMode::skipgram;
      emb_cfg.seed = g.seed;
      const Corpus c = load_corpus(emb_in);
      const Vocabulary v = build_vocab(c, emb_df);
      const EmbeddingMatrix m = train_embeddings(c, v, emb_cfg);
      save_embeddings(m, emb_out);
      prov.outputs.push_back(emb_out);
      prov.options = {{"mode", emb_mode}, {"dim", emb_cfg.dim}, {"window", emb_cfg.window},
                      {"negatives", emb_cfg.negatives}, {"epochs", emb_cfg.epochs}, {"lr", emb_cfg.initial_lr},
                      {"df_threshold", emb_df}};
      out << "vocabulary " << v.size() << ", final loss "
          << fmt(m.epoch_loss.empty() ? 0.0 : m.epoch_loss.back(), "%.4f") << '\n';
    };
  });

  // nearest
  std::string near_emb, near_chord;
  std::size_t near_k = 10;
  auto* near = app.add_subcommand("nearest", "Nearest chords by cosine similarity");
  near->add_option("--embeddings", near_emb)->required();
  near->add_option("--chord", near_chord)->required();
  near->add_option("--k", near_k)->capture_default_str();
  near->callback([&] {
    action = [&] {
      prov.input(near_emb);
      const EmbeddingMatrix m = load_embeddings(near_emb);
      const auto hits = nearest(m, near_chord, near_k);
      if (g.format == "json") {
        Json j = Json::array();
        for (const auto& [tok, sim] : hits) j.push_back({{"chord", tok}, {"cosine", sim}});
        out << j.dump(2) << '\n';
      } else {
        out << "chord,cosine\n";
        for (const auto& [tok, sim] : hits) out << tok << ',' << fmt(sim) << '\n';
      }
      prov.options = {{"chord", near_chord}, {"k", near_k}};
    };
  });

  // analyze
  std::string an_emb, an_in, an_label, an_kind = "chord", an_quality = "major";
  auto* analyze = app.add_subcommand("analyze", "Embedding-space and corpus analyses");
  analyze->require_subcommand(1);
  auto* pca = analyze->add_subcommand("pca", "Two-dimensional PCA projection (CSV and SVG)");
  auto* fifths = analyze->add_subcommand("fifths", "Circle-of-fifths similarity score");
  auto* relatives = analyze->add_subcommand("relatives", "Relative major/minor pairs");
  auto* enharm = analyze->add_subcommand("enharmonics", "Enharmonic spelling pairs");
  for (auto* sub : {pca, fifths, relatives, enharm}) sub->add_option("--embeddings", an_emb)->required();
  fifths->add_option("--quality", an_quality)->check(CLI::IsMember({"major", "minor"}))->capture_default_str();
  auto* salience = analyze->add_subcommand("salience", "Class salience of chords or chord qualities");
  salience->add_option("--input", an_in)->required();
  salience->add_option("--label", an_label)->required();
  salience->add_option("--kind", an_kind)->check(CLI::IsMember({"chord", "quality"}))->capture_default_str();
  pca->callback([&] {
    action = [&] {
      prov.command = "analyze-pca";
      prov.input(an_emb);
      const Projection2D p = pca_project(load_embeddings(an_emb));
      const std::string csv = out_path(g, "pca.csv"), svg = out_path(g, "pca.svg");
      write_projection_csv(p, csv);
      write_projection_svg(p, svg);
      prov.outputs = {csv, svg};
      out << "explained variance " << fmt(p.explained_variance[0], "%.4f") << ", " << fmt(p.explained_variance[1], "%.4f")
          << "\nwrote " << csv << " and " << svg << '\n';
    };
  });
  fifths->callback([&] {
    action = [&] {
      prov.command = "analyze-fifths";
      prov.input(an_emb);
      const FifthScore s = fifth_chain_score(load_embeddings(an_emb), parse_quality_name(an_quality));
      const std::string csv = out_path(g, "fifths_" + an_quality + ".csv");
      write_fifth_csv(s, an_quality, csv);
      prov.outputs = {csv};
      prov.options = {{"quality", an_quality}};
      out << "fifth pairs " << s.n_fifth << " mean cosine " << fmt(s.mean_fifth, "%.4f") << "; random pairs "
          << s.n_random << " mean " << fmt(s.mean_random, "%.4f") << " (stderr " << fmt(s.random_stderr, "%.4f")
          << "); gap " << fmt(s.gap, "%.4f") << '\n';
    };
  });
  relatives->callback([&] {
    action = [&] {
      prov.command = "analyze-relatives";
      prov.input(an_emb);
      const RelativeReport r = relative_pair_report(load_embeddings(an_emb));
      const std::string csv = out_path(g, "relatives.csv");
      write_relative_csv(r, csv);
      prov.outputs = {csv};
      out << "major,minor,cosine,neighbor_rank\n";
      for (const auto& p : r.pairs) out << p.major << ',' << p.minor << ',' << fmt(p.cosine, "%.4f") << ',' << p.neighbor_rank << '\n';
      for (const auto& n : r.notes) out << "note: " << n << '\n';
    };
  });
  enharm->callback([&] {
    action = [&] {
      prov.command = "analyze-enharmonics";
      prov.input(an_emb);
      const auto pairs = enharmonic_report(load_embeddings(an_emb));
      const std::string csv = out_path(g, "enharmonics.csv");
      write_enharmonic_csv(pairs, csv);
      prov.outputs = {csv};
      out << "sharp,flat,cosine\n";
      for (const auto& p : pairs) out << p.sharp << ',' << p.flat << ',' << fmt(p.cosine, "%.4f") << '\n';
    };
  });
  salience->callback([&] {
    action = [&] {
      prov.command = "analyze-salience";
      prov.input(an_in);
      const Corpus c = load_corpus(an_in);
      const SalienceReport r = an_kind == "chord" ? chord_salience(c, an_label) : quality_salience(c, an_label);
      const std::string csv = out_path(g, "salience_" + an_kind + "_" + an_label + ".csv");
      write_salience_csv(r, csv);
      prov.outputs = {csv};
      prov.options = {{"label", an_label}, {"kind", an_kind}};
      out << "classes " << r.class_a << " vs " << r.class_b << "; " << r.entries.size() << " entries written to " << csv
          << '\n';
    };
  });

  // train-lm
  std::string lm_train_path, lm_valid_path, lm_input, lm_out, lm_init = "NI", lm_emb;
  LMConfig lm_cfg;
  double lm_df = 0.001;
  auto* train_lm = app.add_subcommand("train-lm", "Train the LSTM next-chord language model");
  train_lm->add_option("--input", lm_input, "Corpus split 80/10/10 into train/valid/test");
  train_lm->add_option("--train", lm_train_path);
  train_lm->add_option("--valid", lm_valid_path);
  train_lm->add_option("--output", lm_out, "Checkpoint (JSON)")->required();
  train_lm->add_option("--init", lm_init)->check(CLI::IsMember({"NI", "PR", "CE_cbow", "CE_sglm"}))->capture_default_str();
  train_lm->add_option("--embeddings", lm_emb, "Vector file for CE_* initialization");
  train_lm->add_option("--emb-dim", lm_cfg.emb_dim)->capture_default_str();
  train_lm->add_option("--hidden", lm_cfg.hidden_dim, "0: same as --emb-dim")->capture_default_str();
  train_lm->add_option("--layers", lm_cfg.layers)->capture_default_str();
  train_lm->add_option("--bptt", lm_cfg.seq_len)->capture_default_str();
  train_lm->add_option("--batch", lm_cfg.batch)->capture_default_str();
  train_lm->add_option("--dropout", lm_cfg.dropout)->capture_default_str();
  train_lm->add_option("--lr", lm_cfg.lr)->capture_default_str();
  train_lm->add_option("--clip", lm_cfg.clip)->capture_default_str();
  train_lm->add_option("--epochs", lm_cfg.epochs)->capture_default_str();
  train_lm->add_option("--df-threshold", lm_df)->capture_default_str();
  train_lm->callback([&] {
    action = [&] {
      Corpus tr, va, te;
      if (!lm_input.empty()) {
        prov.input(lm_input);
        Split s = split(load_corpus(lm_input), g.seed);
        tr = std::move(s.train);
        va = std::move(s.valid);
        te = std::move(s.test);
      } else {
        if (lm_train_path.empty() || lm_valid_path.empty()) throw ConfigError("give --input or both --train and --valid");
        prov.input(lm_train_path);
        prov.input(lm_valid_path);
        tr = load_corpus(lm_train_path);
        va = load_corpus(lm_valid_path);
      }
      lm_cfg.init = parse_encoder_init(lm_init);
      lm_cfg.seed = g.seed;
      std::optional<EmbeddingMatrix> emb;
      if (!lm_emb.empty()) {
        prov.input(lm_emb);
        emb = load_embeddings(lm_emb);
        if (lm_cfg.init == EncoderInit::CE_cbow || lm_cfg.init == EncoderInit::CE_sglm) lm_cfg.emb_dim = emb->dim();
      }
      const Vocabulary v = build_vocab(tr, lm_df);
      const LMModel m = lm_train(tr, va, v, lm_cfg, emb ? &*emb : nullptr);
      save_lm(m, lm_out);
      prov.outputs.push_back(lm_out);
      prov.options = {{"init", lm_init}, {"emb_dim", lm_cfg.emb_dim}, {"hidden", lm_cfg.hidden()},
                      {"layers", lm_cfg.layers}, {"bptt", lm_cfg.seq_len}, {"batch", lm_cfg.batch},
                      {"dropout", lm_cfg.dropout}, {"lr", lm_cfg.lr}, {"clip", lm_cfg.clip},
                      {"epochs", lm_cfg.epochs}, {"df_threshold", lm_df}};
      out << "validation perplexity " << fmt(perplexity(m, va).ppl, "%.4f");
      if (!te.empty()) out << ", test perplexity " << fmt(perplexity(m, te).ppl, "%.4f");
      out << '\n';
    };
  });

  // predict
  std::string pred_model, pred_prog;
  std::size_t pred_k = 4;
  bool pred_interactive = false;
  auto* predict = app.add_subcommand("predict", "Top-k next chords for a progression");
  predict->add_option("--model", pred_model)->required();
  predict->add_option("--progression", pred_prog, "Chords separated by commas or spaces");
  predict->add_option("--k", pred_k)->capture_default_str();
  predict->add_flag("--interactive", pred_interactive, "Read progressions and choices from stdin");
  predict->callback([&] {
    action = [&] {
      prov.input(pred_model);
      const LMModel m = load_lm(pred_model);
      const auto prog = split_progression(pred_prog);
      check_chords(prog);
      prov.options = {{"progression", pred_prog}, {"k", pred_k}, {"interactive", pred_interactive}};
      if (pred_interactive) {
        interactive_predict(m, pred_k, prog, in, out);
        return;
      }
      if (prog.empty()) throw ConfigError("--progression is required without --interactive");
      const auto s = predict_next(m, prog, pred_k);
      if (g.format == "json") {
        Json j = Json::array();
        for (const auto& [c, p] : s) j.push_back({{"chord", c}, {"probability", p}});
        out << j.dump(2) << '\n';
      } else {
        print_suggestions(out, s);
      }
    };
  });

  // eval-annotations
  std::string ev_ann;
  std::vector<std::string> ev_models;
  bool ev_first_only = false;
  auto* eval = app.add_subcommand("eval-annotations", "Compare model predictions with human annotations");
  eval->add_option("--annotations", ev_ann)->required();
  eval->add_option("--model", ev_models, "Checkpoint (repeatable)")->required();
  eval->add_flag("--first-only-mode", ev_first_only, "Mode over first choices only");
  eval->callback([&] {
    action = [&] {
      prov.input(ev_ann);
      const auto ann = load_annotations(ev_ann);
      std::map<std::string, std::vector<std::string>> progressions;
      for (const auto& r : ann) progressions[r.prompt_id] = r.progression;
      std::vector<MetricReport> reports;
      for (const auto& path : ev_models) {
        prov.input(path);
        const LMModel m = load_lm(path);
        Predictions preds;
        for (const auto& [id, prog] : progressions) {
          for (const auto& [c, p] : predict_next(m, prog, 4)) preds[id].push_back(c);
        }
        reports.push_back(expertise_report(fs::path(path).stem().string(), preds, ann, ev_first_only));
      }
      const std::string csv = out_path(g, "annotation_metrics.csv");
      write_report_csv(reports, csv);
      prov.outputs = {csv};
      prov.options = {{"first_only_mode", ev_first_only}};
      out << format_report_table(reports);
      out << "pairwise agreement " << fmt(pairwise_agreement(ann), "%.2f") << ", pitch agreement "
          << fmt(pairwise_pitch_agreement(ann), "%.2f") << '\n';
    };
  });

  // classify
  std::string cl_in, cl_label, cl_cbow, cl_sglm;
  StudyConfig study;
  double cl_df = 0.001;
  bool cl_lr_only = false;
  auto* classify = app.add_subcommand("classify", "Cross-validated artist-attribute classifiers");
  classify->add_option("--input", cl_in)->required();
  classify->add_option("--label", cl_label)->required();
  classify->add_option("--cbow", cl_cbow, "CBOW vector file");
  classify->add_option("--sglm", cl_sglm, "Skip-gram vector file");
  classify->add_option("--folds", study.folds)->capture_default_str();
  classify->add_option("--l2", study.lr.l2)->capture_default_str();
  classify->add_option("--cnn-epochs", study.cnn.epochs)->capture_default_str();
  classify->add_option("--cnn-emb-dim", study.cnn.emb_dim, "Encoder size for NI and PR")->capture_default_str();
  classify->add_option("--df-threshold", cl_df)->capture_default_str();
  classify->add_flag("--lr-only", cl_lr_only, "Skip the CNN models");
  classify->callback([&] {
    action = [&] {
      prov.input(cl_in);
      const Corpus c = load_corpus(cl_in);
      std::optional<EmbeddingMatrix> cbow, sglm;
      if (!cl_cbow.empty()) {
        prov.input(cl_cbow);
        cbow = load_embeddings(cl_cbow);
      }
      if (!cl_sglm.empty()) {
        prov.input(cl_sglm);
        sglm = load_embeddings(cl_sglm);
      }
      study.seed = g.seed;
      study.cnn.seed = g.seed;
      if (cl_lr_only) study.cnn_inits.clear();
      const Vocabulary v = build_vocab(c, cl_df);
      const StudyReport r = run_attribute_study(c, cl_label, v, cbow ? &*cbow : nullptr, sglm ? &*sglm : nullptr, study);
      const std::string csv = out_path(g, "classify_" + cl_label + ".csv");
      write_study_csv(r, csv);
      prov.outputs = {csv};
      prov.options = {{"label", cl_label}, {"folds", study.folds}, {"l2", study.lr.l2},
                      {"cnn_epochs", study.cnn.epochs}, {"lr_only", cl_lr_only}, {"df_threshold", cl_df}};
      out << format_study_table(r);
    };
  });

  // serve
  std::string sv_prompts, sv_ann, sv_model, sv_host = "127.0.0.1";
  int sv_port = 8080;
  auto* serve = app.add_subcommand("serve", "HTTP/JSON API for annotation and suggestions");
  serve->add_option("--prompts", sv_prompts)->required();
  serve->add_option("--annotations", sv_ann, "Annotation file (appended)")->required();
  serve->add_option("--model", sv_model, "Checkpoint used by /api/suggest");
  serve->add_option("--host", sv_host)->capture_default_str();
  serve->add_option("--port", sv_port)->capture_default_str();
  serve->callback([&] {
    action = [&] {
      prov.input(sv_prompts);
      std::optional<LMModel> model;
      if (!sv_model.empty()) {
        prov.input(sv_model);
        model = load_lm(sv_model);
      }
      prov.options = {{"host", sv_host}, {"port", sv_port}};
      prov.outputs = {sv_ann};
      prov.write(g);
      AnnotationService svc(load_prompts(sv_prompts), sv_ann, std::move(model));
      ApiServer server(svc);
      const int port = server.bind(sv_host, sv_port);
      if (port < 0) throw IoError("cannot bind " + sv_host + ":" + std::to_string(sv_port));
      out << "listening on http://" << sv_host << ':' << port << std::endl;
      server.listen();
    };
  });

  if (argc <= 1) {
    err << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(make_logger(err, g.log_level));
  int code = 0;
  try {
    fs::create_directories(g.out_dir);
    for (auto* sub : app.get_subcommands()) {
      prov.command = sub->get_name();
      const CLI::Option* output = sub->get_option_no_throw("--output");
      if (output != nullptr && output->count() > 0) {
        const fs::path parent = fs::path(output->as<std::string>()).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
      }
    }
    action();
    if (prov.command != "serve") prov.write(g);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  }
  spdlog::set_default_logger(previous);
  return code;
}

}  // namespace chordvec
