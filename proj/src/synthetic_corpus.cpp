#include "sore/synthetic_corpus.hpp"

#include "sore/errors.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <random>
#include <string_view>

namespace sore {

namespace {

// Topic vocabularies. None of these words occurs in the builtin outlier
// phrases, so truth text never shares tokens with injected boilerplate.
constexpr std::array<std::array<std::string_view, 14>, 12> kTopics = {{
    {"telescope", "nebula", "orbit", "comet", "galaxy", "astronomers", "spectrum", "planet",
     "lunar", "eclipse", "observatory", "stellar", "asteroid", "satellite"},
    {"harvest", "wheat", "farmers", "irrigation", "soil", "barley", "drought", "tractor", "orchard",
     "fertilizer", "crops", "rainfall", "granary", "seedlings"},
    {"glacier", "iceberg", "arctic", "melting", "permafrost", "tundra", "snowfall", "polar",
     "fjord", "meltwater", "sea", "ice", "shelf", "expedition"},
    {"violin", "orchestra", "symphony", "conductor", "cello", "concerto", "melody", "rehearsal",
     "composer", "quartet", "tempo", "harmony", "soloist", "overture"},
    {"volcano", "lava", "magma", "eruption", "crater", "ash", "tremor", "basalt", "geologists",
     "caldera", "vent", "pumice", "seismic", "summit"},
    {"bakery", "sourdough", "flour", "oven", "dough", "yeast", "crust", "pastry", "baker", "loaf",
     "butter", "knead", "rye", "croissant"},
    {"railway", "locomotive", "station", "tracks", "carriage", "freight", "tunnel", "signal",
     "timetable", "platform", "passengers", "engineer", "viaduct", "steam"},
    {"coral", "reef", "divers", "lagoon", "plankton", "turtles", "current", "snorkel", "fish",
     "atoll", "kelp", "tide", "marine", "biologists"},
    {"chess", "grandmaster", "opening", "gambit", "endgame", "bishop", "knight", "rook",
     "tournament", "checkmate", "pawn", "queen", "castling", "rating"},
    {"beekeepers", "honey", "hive", "pollen", "queen", "swarm", "nectar", "wax", "colony", "meadow",
     "clover", "bees", "drones", "apiary"},
    {"cyclists", "peloton", "sprint", "mountain", "stage", "climb", "descent", "jersey", "gears",
     "bicycle", "velodrome", "breakaway", "pedal", "team"},
    {"manuscript", "archive", "scribes", "parchment", "library", "ink", "monastery", "codex",
     "illuminated", "scholars", "vellum", "binding", "folio", "medieval"},
}};

constexpr std::array<std::string_view, 6> kJoiners = {"the", "and", "of", "with", "in", "a"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n). mt19937_64 output is fully specified; the modulo
  // bias at these tiny ranges is negligible.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool ascii_letters_only(std::string_view s) {
  for (char c : s) {
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != ' ') return false;
  }
  return true;
}

// Case changes are free under the lowercasing embedder; the other edits are
// only applied to phrases long enough that they stay near their source.
std::string mutate(std::string_view phrase, Rng& rng) {
  std::string s(phrase);
  switch (rng.below(4)) {
    case 1:
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      break;
    case 2:
      for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    default: break;
  }
  const bool plural_ok = s.size() >= 7 && ascii_letters_only(s) &&
                         std::tolower(static_cast<unsigned char>(s.back())) != 's';
  if (plural_ok && rng.chance(0.3)) s += std::isupper(static_cast<unsigned char>(s.back())) ? "S" : "s";
  if (s.size() >= 14 && rng.chance(0.3)) {
    s = "Please " + s;
  } else if (s.size() >= 8 && rng.chance(0.25)) {
    s = "\xC2\xBB " + s;  // »
  }
  return s;
}

std::string make_sentence(const std::array<std::string_view, 14>& pool, std::size_t words, Rng& rng) {
  std::string s;
  std::size_t last = pool.size();
  for (std::size_t i = 0; i < words; ++i) {
    if (i > 0 && i + 1 < words && rng.chance(0.2)) {
      s += ' ';
      s += kJoiners[rng.below(kJoiners.size())];
    }
    std::size_t w = rng.below(pool.size());
    if (w == last) w = (w + 1) % pool.size();
    last = w;
    if (!s.empty()) s += ' ';
    s += pool[w];
  }
  return capitalize(s) + ".";
}

std::string make_title(const std::array<std::string_view, 14>& pool, Rng& rng) {
  const std::size_t words = 4 + rng.below(3);
  std::array<bool, 14> used{};
  std::string title;
  for (std::size_t i = 0; i < words; ++i) {
    std::size_t w = rng.below(pool.size());
    while (used[w]) w = (w + 1) % pool.size();
    used[w] = true;
    if (!title.empty()) title += ' ';
    title += capitalize(std::string(pool[w]));
  }
  return title;
}

enum class Slot { Nav, Inline, Footer };

}  // namespace

std::vector<SyntheticDocument> generate_synthetic_corpus(std::size_t n_docs, std::uint64_t seed,
                                                         const SyntheticCorpusOptions& options) {
  if (n_docs < 1) throw Error(ErrorKind::InvalidArgument, "n_docs must be >= 1");
  if (!(options.home_ambiguity_rate >= 0.0 && options.home_ambiguity_rate <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "home_ambiguity_rate must be in [0, 1]");
  }
  const auto phrases = flatten_phrases(builtin_outlier_groups());
  const auto find_phrase = [&](std::string_view p) {
    for (const auto& e : phrases) {
      if (e.phrase == p) return e;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown builtin phrase");
  };
  const PhraseEntry home = find_phrase("Home");
  const std::array<PhraseEntry, 2> footer_marks = {find_phrase("All rights reserved"),
                                                   find_phrase("Copyright")};

  Rng rng(seed);
  std::vector<SyntheticDocument> docs;
  docs.reserve(n_docs);
  for (std::size_t n = 0; n < n_docs; ++n) {
    SyntheticDocument doc;
    const auto& pool = kTopics[rng.below(kTopics.size())];
    doc.title = make_title(pool, rng);

    std::vector<std::string> paragraphs(5 + rng.below(8));
    for (auto& p : paragraphs) p = make_sentence(pool, 3 + rng.below(3), rng);
    const bool with_description = rng.chance(0.5);
    const std::string description = with_description ? make_sentence(pool, 8, rng) : std::string();

    // The first boilerplate item is always a footer rights line.
    std::vector<PhraseEntry> sources;
    std::vector<Slot> slots;
    const std::size_t n_boiler = 3 + rng.below(6);
    sources.push_back(footer_marks[rng.below(footer_marks.size())]);
    slots.push_back(Slot::Footer);
    while (sources.size() < n_boiler) {
      sources.push_back(phrases[rng.below(phrases.size())]);
      slots.push_back(static_cast<Slot>(rng.below(3)));
    }

    doc.home_in_body = rng.chance(options.home_ambiguity_rate);
    std::size_t home_heading_at = 0;
    if (doc.home_in_body) {
      sources[1] = home;
      slots[1] = Slot::Nav;
      home_heading_at = 1 + rng.below(paragraphs.size() - 1);
    }

    std::vector<std::vector<std::string>> inline_after(paragraphs.size());
    std::vector<std::string> nav_items, footer_items;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      BoilerplateItem item{mutate(sources[i].phrase, rng), sources[i].phrase, sources[i].group};
      switch (slots[i]) {
        case Slot::Nav: nav_items.push_back(item.text); break;
        case Slot::Footer: footer_items.push_back(item.text); break;
        case Slot::Inline: inline_after[rng.below(paragraphs.size())].push_back(item.text); break;
      }
      doc.boilerplate.push_back(std::move(item));
    }

    std::string& h = doc.html;
    h += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    h += "<title>" + html_escape(doc.title) + "</title>\n";
    if (with_description) h += "<meta name=\"description\" content=\"" + html_escape(description) + "\">\n";
    h += "</head>\n<body>\n";
    if (!nav_items.empty()) {
      h += "<header>\n<nav>\n<ul>\n";
      for (const auto& t : nav_items) h += "<li><a href=\"#\">" + html_escape(t) + "</a></li>\n";
      h += "</ul>\n</nav>\n</header>\n";
    }
    h += "<main>\n<article>\n<h1>" + html_escape(doc.title) + "</h1>\n";
    doc.truth = doc.title + "\n";
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
      if (doc.home_in_body && i == home_heading_at) {
        h += "<h2>Home</h2>\n";
        doc.truth += "Home\n";
      }
      h += "<p>" + html_escape(paragraphs[i]) + "</p>\n";
      doc.truth += paragraphs[i] + "\n";
      for (const auto& t : inline_after[i]) h += "<div class=\"widget\">" + html_escape(t) + "</div>\n";
    }
    h += "</article>\n</main>\n<footer>\n";
    for (const auto& t : footer_items) h += "<p>" + html_escape(t) + "</p>\n";
    h += "</footer>\n</body>\n</html>\n";
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<LabeledDocument> to_labeled(const std::vector<SyntheticDocument>& docs) {
  std::vector<LabeledDocument> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "%04zu", i);
    out.push_back({id, docs[i].html, docs[i].truth});
  }
  return out;
}

}  // namespace sore
