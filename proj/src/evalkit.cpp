#include "sore/evalkit.hpp"

#include "sore/errors.hpp"
#include "sore/response.hpp"
#include "sore/text.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace sore {

namespace {

std::vector<std::string> sorted_tokens(const std::string& s) {
  auto tokens = text::eval_tokens(s);
  std::sort(tokens.begin(), tokens.end());
  return tokens;
}

std::size_t multiset_intersection(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return n;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string format_grid(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

double harmonic_f(double precision, double recall) {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

OverlapCounts overlap_counts(const std::string& extracted, const std::string& truth) {
  const auto a = sorted_tokens(extracted);
  const auto b = sorted_tokens(truth);
  return {multiset_intersection(a, b), a.size(), b.size()};
}

EvalScores scores_from_counts(const OverlapCounts& c) {
  if (c.extracted == 0 && c.truth == 0) return {1.0, 1.0, 1.0};
  if (c.extracted == 0 || c.truth == 0) return {0.0, 0.0, 0.0};
  const double p = static_cast<double>(c.intersection) / static_cast<double>(c.extracted);
  const double r = static_cast<double>(c.intersection) / static_cast<double>(c.truth);
  return {p, r, harmonic_f(p, r)};
}

EvalScores overlap_scores(const std::string& extracted, const std::string& truth) {
  return scores_from_counts(overlap_counts(extracted, truth));
}

EvalScores micro_from_counts(std::span<const OverlapCounts> counts) {
  OverlapCounts total;
  for (const auto& c : counts) {
    total.intersection += c.intersection;
    total.extracted += c.extracted;
    total.truth += c.truth;
  }
  return scores_from_counts(total);
}

CorpusScores corpus_scores(std::span<const TextPair> pairs) {
  if (pairs.empty()) throw Error(ErrorKind::InvalidArgument, "corpus_eval needs at least one pair");
  std::vector<OverlapCounts> counts;
  counts.reserve(pairs.size());
  std::vector<double> ps, rs, fs;
  for (const auto& [extracted, truth] : pairs) {
    counts.push_back(overlap_counts(extracted, truth));
    const auto s = scores_from_counts(counts.back());
    ps.push_back(s.precision);
    rs.push_back(s.recall);
    fs.push_back(s.f_score);
  }
  CorpusScores out;
  out.n_docs = pairs.size();
  out.macro.precision = mean(ps);
  out.macro.recall = mean(rs);
  out.macro.f_score = harmonic_f(out.macro.precision, out.macro.recall);
  out.macro_mean_f = mean(fs);
  out.micro = micro_from_counts(counts);
  return out;
}

EvalScores corpus_eval(std::span<const TextPair> pairs, Aggregation aggregation) {
  const auto s = corpus_scores(pairs);
  return aggregation == Aggregation::Macro ? s.macro : s.micro;
}

bool removal_is_correct(const std::string& segment_text, const std::string& truth) {
  const auto seg = sorted_tokens(segment_text);
  if (seg.empty()) return true;
  const auto t = sorted_tokens(truth);
  return 2 * multiset_intersection(seg, t) < seg.size();
}

std::vector<KeywordAccuracyRow> keyword_accuracy(std::span<const DocumentDecisions> documents,
                                                 const std::vector<OutlierGroup>& groups) {
  std::vector<KeywordAccuracyRow> rows;
  std::map<std::string, std::size_t> row_of;
  std::vector<std::size_t> correct;
  for (const auto& entry : flatten_phrases(groups)) {
    if (row_of.emplace(entry.phrase, rows.size()).second) {
      rows.push_back({entry.phrase, 0, std::nullopt});
      correct.push_back(0);
    }
  }

  for (const auto& doc : documents) {
    for (const auto& d : doc.decisions) {
      if (d.verdict != Verdict::RemovedOutlier || !d.nearest_phrase) continue;
      const auto it = row_of.find(*d.nearest_phrase);
      if (it == row_of.end()) continue;
      ++rows[it->second].occurrence;
      if (d.segment_id < doc.segment_texts.size() &&
          removal_is_correct(doc.segment_texts[d.segment_id], doc.truth)) {
        ++correct[it->second];
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].occurrence > 0) {
      rows[i].accuracy = static_cast<double>(correct[i]) / static_cast<double>(rows[i].occurrence);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const KeywordAccuracyRow& a, const KeywordAccuracyRow& b) {
    if (a.accuracy.has_value() != b.accuracy.has_value()) return a.accuracy.has_value();
    return a.accuracy.has_value() && *a.accuracy < *b.accuracy;
  });
  return rows;
}

std::string keyword_accuracy_table(std::span<const KeywordAccuracyRow> rows) {
  std::string out = "phrase\toccurrence\taccuracy\n";
  for (const auto& r : rows) {
    out += r.phrase + "\t" + std::to_string(r.occurrence) + "\t" +
           (r.accuracy ? format_number(*r.accuracy) : std::string("null")) + "\n";
  }
  return out;
}

std::vector<SweepPoint> sweep(const Pipeline& pipeline, std::span<const LabeledDocument> corpus,
                              std::span<const double> k_grid, std::span<const double> d_grid,
                              const SweepOptions& options) {
  if (k_grid.empty() || d_grid.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grids must be non-empty");
  if (corpus.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one document");
  const std::size_t n_points = k_grid.size() * d_grid.size();
  std::vector<CleanConfig> knobs(n_points, pipeline.config());
  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    for (std::size_t di = 0; di < d_grid.size(); ++di) {
      auto& c = knobs[ki * d_grid.size() + di];
      c.core_fraction_k = k_grid[ki];
      c.distance_cutoff_d = d_grid[di];
      c.validate();
    }
  }

  struct DocOutcome {
    bool ok = false;
    std::vector<OverlapCounts> counts;  // per grid point
    std::vector<double> removed_fraction;
  };
  std::vector<DocOutcome> outcomes(corpus.size());

  detail::parallel_for(corpus.size(), options.threads, [&](std::size_t i) {
    auto& out = outcomes[i];
    try {
      const auto doc = pipeline.embed(corpus[i].html);
      out.counts.reserve(n_points);
      for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
        const auto measured = pipeline.measure(doc, knobs[ki * d_grid.size()]);
        for (std::size_t di = 0; di < d_grid.size(); ++di) {
          const auto result = pipeline.decide(doc, measured, knobs[ki * d_grid.size() + di]);
          out.counts.push_back(overlap_counts(cleaned_text(result), corpus[i].truth));
          out.removed_fraction.push_back(result.stats.removed_char_fraction);
        }
      }
      out.ok = true;
    } catch (const Error&) {
      out = DocOutcome{};
    }
  });

  std::vector<SweepPoint> points;
  points.reserve(n_points);
  for (std::size_t p = 0; p < n_points; ++p) {
    SweepPoint pt;
    pt.k = knobs[p].core_fraction_k;
    pt.d = knobs[p].distance_cutoff_d;
    std::vector<double> ps, rs, fs, removed;
    std::vector<OverlapCounts> counts;
    for (const auto& o : outcomes) {
      if (!o.ok) {
        ++pt.skipped;
        continue;
      }
      const auto s = scores_from_counts(o.counts[p]);
      ps.push_back(s.precision);
      rs.push_back(s.recall);
      fs.push_back(s.f_score);
      removed.push_back(o.removed_fraction[p]);
      counts.push_back(o.counts[p]);
    }
    pt.scores.precision = mean(ps);
    pt.scores.recall = mean(rs);
    pt.scores.f_score = harmonic_f(pt.scores.precision, pt.scores.recall);
    pt.macro_mean_f = mean(fs);
    pt.micro = counts.empty() ? EvalScores{} : micro_from_counts(counts);
    pt.mean_removed_fraction = mean(removed);
    points.push_back(pt);
  }
  return points;
}

std::string sweep_csv(std::span<const SweepPoint> points) {
  std::string out = "k,d,precision,recall,f,mean_removed_fraction,skipped\n";
  for (const auto& p : points) {
    out += format_grid(p.k) + "," + format_grid(p.d) + "," + format_number(p.scores.precision) + "," +
           format_number(p.scores.recall) + "," + format_number(p.scores.f_score) + "," +
           format_number(p.mean_removed_fraction) + "," + std::to_string(p.skipped) + "\n";
  }
  return out;
}

std::vector<std::optional<CleanResult>> clean_corpus(const Pipeline& pipeline,
                                                     std::span<const LabeledDocument> corpus,
                                                     const CleanConfig& knobs,
                                                     const SweepOptions& options) {
  std::vector<std::optional<CleanResult>> results(corpus.size());
  detail::parallel_for(corpus.size(), options.threads, [&](std::size_t i) {
    try {
      results[i] = pipeline.clean(corpus[i].html, knobs);
    } catch (const Error&) {
      results[i].reset();
    }
  });
  return results;
}

CorpusScores keep_everything_scores(std::span<const LabeledDocument> corpus,
                                    const SegmenterOptions& options) {
  std::vector<TextPair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& doc : corpus) {
    std::string extracted;
    try {
      for (const auto& s : parse_document(doc.html, options).segments) {
        if (!extracted.empty()) extracted += "\n\n";
        extracted += s.text;
      }
    } catch (const Error&) {
      extracted.clear();
    }
    pairs.emplace_back(std::move(extracted), doc.truth);
  }
  return corpus_scores(pairs);
}

}  // namespace sore
