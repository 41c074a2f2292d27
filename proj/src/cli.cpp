#include "sore/cli.hpp"

#include "sore/core.hpp"
#include "sore/corpus_io.hpp"
#include "sore/errors.hpp"
#include "sore/evalkit.hpp"
#include "sore/response.hpp"
#include "sore/service.hpp"
#include "sore/synthetic_corpus.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

namespace sore {

namespace {

struct PipelineFlags {
  double k = 0.2;
  double d = 0.8;
  double outlier_cutoff = 0.25;
  double max_removal = 0.8;
  std::string groups = "builtin";
  std::string index;
  std::string embedder = "hashing";
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  std::size_t batch_size = 96;
  std::size_t ef_search = 64;
  bool split_sentences = false;
  bool no_metadata_anchor = false;
};

void add_embedder_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--groups", f.groups, "Outlier groups file, or 'builtin'");
  cmd->add_option("--embedder", f.embedder, "Embedding provider")
      ->check(CLI::IsMember({"hashing", "remote"}));
  cmd->add_option("--dim", f.dim, "Embedding dimension");
  cmd->add_option("--seed", f.seed, "Hashing and index seed");
  cmd->add_option("--batch-size", f.batch_size, "Texts per embedding call");
}

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  add_embedder_flags(cmd, f);
  cmd->add_option("--k", f.k, "Core fraction");
  cmd->add_option("--cutoff", f.d, "Distance cutoff d");
  cmd->add_option("--outlier-cutoff", f.outlier_cutoff, "Absolute outlier match cutoff");
  cmd->add_option("--max-removal", f.max_removal, "Fallback threshold on removed character fraction");
  cmd->add_option("--index", f.index, "Prebuilt outlier index file");
  cmd->add_option("--ef-search", f.ef_search, "ANN search beam width");
  cmd->add_flag("--split-sentences", f.split_sentences, "Split blocks into sentences");
  cmd->add_flag("--no-metadata-anchor", f.no_metadata_anchor, "Do not use the metadata vector as a core anchor");
}

CleanConfig make_config(const PipelineFlags& f) {
  CleanConfig c;
  c.core_fraction_k = f.k;
  c.distance_cutoff_d = f.d;
  c.outlier_match_cutoff = f.outlier_cutoff;
  c.max_removal_fraction = f.max_removal;
  c.include_metadata_in_core_anchors = !f.no_metadata_anchor;
  c.ef_search = f.ef_search;
  c.segmenter.split_sentences = f.split_sentences;
  c.embedder.provider = f.embedder == "remote" ? ProviderKind::Remote : ProviderKind::Hashing;
  c.embedder.dim = f.dim;
  c.embedder.hashing_seed = f.seed;
  c.embedder.batch_size = f.batch_size;
  c.ann.seed = f.seed;
  apply_env_overrides(c.embedder);
  if (const char* auth = std::getenv("SORE_EMBED_AUTH"); auth && *auth) c.embedder.remote_auth = auth;
  c.validate();
  return c;
}

std::shared_ptr<const Pipeline> make_pipeline(const PipelineFlags& f) {
  auto config = make_config(f);
  auto groups = load_outlier_groups(f.groups);
  std::shared_ptr<const EmbeddingProvider> provider = make_provider(config.embedder);
  if (!f.index.empty()) {
    const auto bytes = read_file(f.index);
    auto index = AnnIndex::deserialize(
        std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    return std::make_shared<const Pipeline>(std::move(config), std::move(groups), std::move(provider),
                                            std::move(index));
  }
  return std::make_shared<const Pipeline>(std::move(config), std::move(groups), std::move(provider));
}

std::vector<double> parse_grid(const std::string& text, const char* name) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, std::string("bad value in ") + name + ": '" + item + "'");
    }
  }
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, std::string(name) + " is empty");
  return grid;
}

void emit(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

std::string fmt6(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic outlier removal for web documents"};
  app.require_subcommand(1);

  PipelineFlags pf;

  // clean
  auto* clean = app.add_subcommand("clean", "Clean one HTML document");
  std::string clean_input = "-";
  std::string format = "json";
  std::string doc_id;
  bool timing = false;
  clean->add_option("input", clean_input, "HTML file, or - for stdin");
  clean->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
  clean->add_option("--doc-id", doc_id, "Document id echoed in the response");
  clean->add_flag("--timing", timing, "Report per-document latency");
  add_pipeline_flags(clean, pf);

  // index build
  auto* index = app.add_subcommand("index", "Outlier index operations");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Embed the outlier phrases and serialize the index");
  std::string index_out;
  std::size_t index_m = 16, index_efc = 200;
  index_build->add_option("--out", index_out, "Output file")->required();
  index_build->add_option("--M", index_m, "Graph degree");
  index_build->add_option("--ef-construction", index_efc, "Construction beam width");
  add_embedder_flags(index_build, pf);

  // eval
  auto* eval = app.add_subcommand("eval", "Score prediction files against truth files");
  std::string pred_dir, truth_dir;
  eval->add_option("--pred", pred_dir, "Directory of NNNN.txt predictions")->required();
  eval->add_option("--truth", truth_dir, "Directory of NNNN.truth.txt files")->required();
  eval->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Precision/recall over a (k, d) grid");
  std::string corpus_dir, k_grid_text = "0.1,0.2,0.3", d_grid_text = "0.6,0.8,1.0", sweep_out;
  std::size_t threads = 0;
  sweep_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  sweep_cmd->add_option("--k-grid", k_grid_text, "Comma-separated k values");
  sweep_cmd->add_option("--d-grid", d_grid_text, "Comma-separated d values");
  sweep_cmd->add_option("--out", sweep_out, "CSV output file (default stdout)");
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  add_pipeline_flags(sweep_cmd, pf);

  // keywords
  auto* keywords = app.add_subcommand("keywords", "Per-phrase removal accuracy on a labeled corpus");
  keywords->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  keywords->add_option("--threads", threads, "Worker threads (0 = all cores)");
  add_pipeline_flags(keywords, pf);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic labeled corpus");
  std::string gen_out;
  std::size_t gen_n = 50;
  std::uint64_t gen_seed = 7;
  double home_rate = 0.0;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--n", gen_n, "Number of documents");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--home-ambiguity", home_rate, "Share of documents with an in-article Home heading");

  // groups-lint
  auto* lint = app.add_subcommand("groups-lint", "Validate a groups file and print counts");
  std::string lint_path = "builtin";
  lint->add_option("file", lint_path, "Groups file, or 'builtin'");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP cleaning service");
  std::string bind, log_path;
  serve->add_option("--bind", bind, "host:port (default $SORE_BIND or 127.0.0.1:8080)");
  serve->add_option("--log", log_path, "Decision log JSONL path (default $SORE_LOG_PATH)");
  add_pipeline_flags(serve, pf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (clean->parsed()) {
      std::string html;
      if (clean_input == "-") {
        std::ostringstream buf;
        buf << in.rdbuf();
        html = buf.str();
      } else {
        html = read_file(clean_input);
      }
      const auto pipeline = make_pipeline(pf);
      CleanRequest request{std::move(html), doc_id.empty() ? std::nullopt : std::optional(doc_id), {}};
      const auto outcome = run_clean(*pipeline, request, {timing, true});
      if (format == "json") {
        out << outcome.response.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
      } else {
        out << cleaned_text(outcome.result) << "\n";
        if (timing) err << "elapsed_ms: " << fmt6(outcome.result.stats.elapsed_ms) << "\n";
      }
      return 0;
    }

    if (index_build->parsed()) {
      auto config = make_config(pf);
      config.ann.M = index_m;
      config.ann.ef_construction = index_efc;
      config.validate();
      const auto provider = make_provider(config.embedder);
      const auto idx = build_outlier_index(load_outlier_groups(pf.groups), *provider, config.ann,
                                           config.embedder.batch_size);
      const auto bytes = idx.serialize();
      write_file(index_out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      err << "wrote " << idx.size() << " points (dim " << idx.dim() << ") to " << index_out << "\n";
      return 0;
    }

    if (eval->parsed()) {
      const auto pairs = read_prediction_pairs(pred_dir, truth_dir);
      const auto s = corpus_scores(pairs);
      if (format == "json") {
        nlohmann::ordered_json j;
        j["n_docs"] = s.n_docs;
        j["macro"] = {{"precision", s.macro.precision}, {"recall", s.macro.recall}, {"f", s.macro.f_score},
                      {"mean_f", s.macro_mean_f}};
        j["micro"] = {{"precision", s.micro.precision}, {"recall", s.micro.recall}, {"f", s.micro.f_score}};
        out << j.dump(2) << "\n";
      } else {
        out << "documents: " << s.n_docs << "\n"
            << "macro precision: " << fmt6(s.macro.precision) << "\n"
            << "macro recall: " << fmt6(s.macro.recall) << "\n"
            << "macro f (of means): " << fmt6(s.macro.f_score) << "\n"
            << "macro f (mean per document): " << fmt6(s.macro_mean_f) << "\n"
            << "micro precision: " << fmt6(s.micro.precision) << "\n"
            << "micro recall: " << fmt6(s.micro.recall) << "\n"
            << "micro f: " << fmt6(s.micro.f_score) << "\n";
      }
      return 0;
    }

    if (sweep_cmd->parsed()) {
      const auto ks = parse_grid(k_grid_text, "--k-grid");
      const auto ds = parse_grid(d_grid_text, "--d-grid");
      const auto corpus = read_corpus(corpus_dir);
      const auto pipeline = make_pipeline(pf);
      const auto points = sweep(*pipeline, corpus, ks, ds, {threads});
      emit(sweep_csv(points), sweep_out, out);
      return 0;
    }

    if (keywords->parsed()) {
      const auto corpus = read_corpus(corpus_dir);
      const auto pipeline = make_pipeline(pf);
      const auto results = clean_corpus(*pipeline, corpus, pipeline->config(), {threads});
      std::vector<DocumentDecisions> docs;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!results[i]) continue;
        DocumentDecisions d;
        for (const auto& s : results[i]->segments) d.segment_texts.push_back(s.text);
        d.decisions = results[i]->decisions;
        d.truth = corpus[i].truth;
        docs.push_back(std::move(d));
      }
      out << keyword_accuracy_table(keyword_accuracy(docs, pipeline->groups()));
      return 0;
    }

    if (gen->parsed()) {
      write_corpus(gen_out, generate_synthetic_corpus(gen_n, gen_seed, {home_rate}));
      err << "wrote " << gen_n << " documents to " << gen_out << "\n";
      return 0;
    }

    if (lint->parsed()) {
      out << lint_report(load_outlier_groups(lint_path));
      return 0;
    }

    if (serve->parsed()) {
      if (bind.empty()) {
        const char* env = std::getenv("SORE_BIND");
        bind = env && *env ? env : "127.0.0.1:8080";
      }
      if (log_path.empty()) {
        if (const char* env = std::getenv("SORE_LOG_PATH"); env && *env) log_path = env;
      }
      if (pf.index.empty()) {
        if (const char* env = std::getenv("SORE_INDEX_PATH"); env && *env) pf.index = env;
      }
      const auto [host, port] = parse_bind_address(bind);
      ServiceOptions options;
      options.log_path = log_path;
      Service service(options);
      // Serve immediately so /healthz can answer 503 while the index loads.
      std::exception_ptr load_error;
      std::thread loader([&] {
        try {
          service.set_pipeline(make_pipeline(pf));
        } catch (...) {
          load_error = std::current_exception();
          service.wait_until_ready();
          service.stop();
        }
      });
      err << "listening on " << host << ":" << port << "\n";
      const bool ok = service.listen(host, port);
      loader.join();
      if (load_error) std::rethrow_exception(load_error);
      if (!ok) {
        err << "error: cannot bind " << bind << "\n";
        return 2;
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error (" << error_kind_name(e.kind()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace sore
