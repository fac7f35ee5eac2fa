#include "narrmap/structure.hpp"

#include "narrmap/connection.hpp"
#include "narrmap/error.hpp"
#include "narrmap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace narrmap {

namespace {

enum class Tag { none, adjective, noun, proper };

std::string first_words(const std::string& body, std::size_t count) {
  std::istringstream in(body);
  std::string out, w;
  for (std::size_t i = 0; i < count && in >> w; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

bool title_cased(const std::vector<RawToken>& tokens, const Lexicon& lexicon) {
  std::size_t content = 0, caps = 0;
  for (const auto& t : tokens) {
    if (lexicon.is_stopword(t.lower)) continue;
    ++content;
    caps += t.capitalized;
  }
  return content >= 3 && caps * 10 > content * 6;
}

// Positions covered by an occurrence of some entity's token sequence.
std::vector<bool> entity_positions(const std::vector<RawToken>& raw, std::span<const EntitySpan> entities) {
  std::vector<bool> hit(raw.size(), false);
  for (const auto& e : entities) {
    const auto n = e.tokens.size();
    for (std::size_t i = 0; n > 0 && i + n <= raw.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < n && match; ++k) match = raw[i + k].lower == e.tokens[k];
      if (match) std::fill_n(hit.begin() + static_cast<std::ptrdiff_t>(i), n, true);
    }
  }
  return hit;
}

void collect_phrases(const std::string& text, const Lexicon& lexicon, std::span<const EntitySpan> entities,
                     std::vector<NameCandidate>& out, std::set<std::string>& seen) {
  const auto raw = scan_words(text);
  const bool caps_uninformative = title_cased(raw, lexicon);
  const auto in_entity = entity_positions(raw, entities);
  std::vector<Tag> tags;
  tags.reserve(raw.size());
  for (std::size_t p = 0; p < raw.size(); ++p) {
    const auto& t = raw[p];
    Tag tag = Tag::none;
    if (!lexicon.is_stopword(t.lower)) {
      const bool proper = in_entity[p] || (t.capitalized && !t.sentence_initial && !caps_uninformative);
      if (proper) tag = Tag::proper;
      else if (lexicon.is_noun(t.lower)) tag = Tag::noun;
      else if (lexicon.is_adjective(t.lower)) tag = Tag::adjective;
    }
    tags.push_back(tag);
  }
  std::size_t i = 0;
  while (i < raw.size()) {
    if (tags[i] == Tag::none) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < raw.size() && tags[j] != Tag::none && raw[j].joined_to_previous) ++j;
    std::size_t end = j;
    while (end > i && tags[end - 1] == Tag::adjective) --end;
    const std::size_t len = end - i;
    if (len >= 2 && len <= 6) {
      NameCandidate c;
      for (std::size_t k = i; k < end; ++k) {
        c.tokens.push_back(raw[k].lower);
        c.has_entity = c.has_entity || tags[k] == Tag::proper;
        c.has_abstract = c.has_abstract || lexicon.is_abstract(raw[k].lower);
      }
      if (c.has_entity || c.has_abstract) {
        std::string key;
        for (const auto& t : c.tokens) key += t + ' ';
        if (seen.insert(key).second) {
          c.phrase = text.substr(raw[i].begin, raw[end - 1].end - raw[i].begin);
          out.push_back(std::move(c));
        }
      }
    }
    i = j;
  }
}

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

std::vector<NameCandidate> candidate_names(std::span<const std::size_t> storyline, const AnalyzedCorpus& analysis) {
  if (storyline.empty()) fail(ErrorKind::invalid_input, "storyline is empty");
  std::vector<NameCandidate> out;
  std::set<std::string> seen;
  for (auto doc : storyline) {
    const auto& d = analysis.corpus()[doc];
    const auto& entities = analysis.entities(doc);
    collect_phrases(d.headline, analysis.lexicon(), entities, out, seen);
    collect_phrases(first_words(d.body, kExplanationBodyWords), analysis.lexicon(), entities, out, seen);
  }
  return out;
}

NameCandidate score_name(NameCandidate c, std::span<const std::size_t> storyline, const AnalyzedCorpus& analysis,
                         std::span<const std::vector<std::string>> existing, const NamingWeights& w) {
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0 || w.delta < 0) fail(ErrorKind::invalid_input, "naming weights must be non-negative");
  c.c_entity = c.has_entity ? 1.0 : 0.0;
  c.c_abstract = c.has_abstract ? 1.0 : 0.0;
  c.c_coverage = 0.0;
  if (!storyline.empty() && !c.tokens.empty()) {
    std::size_t hits = 0;
    for (auto doc : storyline) {
      const auto tokens = tokenize(explanation_text(analysis.corpus()[doc]), analysis.lexicon());
      hits += std::any_of(tokens.begin(), tokens.end(), [&](const Token& t) { return t.text == c.tokens.back(); });
    }
    c.c_coverage = static_cast<double>(hits) / static_cast<double>(storyline.size());
  }
  c.o_overlap = 0.0;
  for (const auto& name : existing) c.o_overlap = std::max(c.o_overlap, token_jaccard(c.tokens, name));
  c.score = w.alpha * c.c_entity + w.beta * c.c_abstract + w.gamma * c.c_coverage - w.delta * c.o_overlap;
  return c;
}

std::vector<StorylineName> name_storylines(const NarrativeMap& map, const AnalyzedCorpus& analysis, const NamingWeights& weights) {
  const auto& corpus = analysis.corpus();
  std::vector<std::vector<std::size_t>> docs;
  for (const auto& s : map.storylines) {
    std::vector<std::size_t> d;
    for (const auto& id : s) d.push_back(corpus.index_of(id));
    docs.push_back(std::move(d));
  }
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return docs[a].size() > docs[b].size(); });

  std::vector<std::vector<std::string>> existing;
  std::vector<StorylineName> names(docs.size());
  for (auto s : order) {
    StorylineName result;
    result.storyline = s;
    std::vector<NameCandidate> scored;
    for (auto& c : candidate_names(docs[s], analysis)) scored.push_back(score_name(std::move(c), docs[s], analysis, existing, weights));
    const bool has_fresh = std::any_of(scored.begin(), scored.end(), [](const NameCandidate& c) { return c.o_overlap < 1.0; });
    if (has_fresh) std::erase_if(scored, [](const NameCandidate& c) { return c.o_overlap >= 1.0; });

    if (!scored.empty()) {
      const NameCandidate* best = &scored.front();
      for (const auto& c : scored) {
        if (&c == best) continue;
        if (!nearly_equal(c.score, best->score)) {
          if (c.score > best->score) best = &c;
        } else if (c.c_coverage != best->c_coverage) {
          if (c.c_coverage > best->c_coverage) best = &c;
        } else if (c.phrase < best->phrase) {
          best = &c;
        }
      }
      result.name = best->phrase;
      result.breakdown = *best;
      existing.push_back(best->tokens);
    } else {
      result.fallback = true;
      std::map<int, std::size_t> votes;
      for (auto d : docs[s])
        if (analysis.clusters().hard_label[d] != kNoise) ++votes[analysis.clusters().hard_label[d]];
      std::vector<std::string> words;
      if (!votes.empty()) {
        auto top = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
        for (const auto& k : analysis.keywords(top->first)) {
          if (words.size() == 2) break;
          words.push_back(k.term);
        }
      }
      if (words.size() < 2) {
        std::map<std::string, std::size_t> freq;
        for (auto d : docs[s])
          for (const auto& t : analysis.tfidf().document_tokens(d)) ++freq[t];
        std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [t, _] : ranked) {
          if (words.size() == 2) break;
          if (std::find(words.begin(), words.end(), t) == words.end()) words.push_back(t);
        }
      }
      for (const auto& w : words) result.name += (result.name.empty() ? "" : " ") + w;
      result.breakdown.phrase = result.name;
      result.breakdown.tokens = words;
      existing.push_back(words);
    }
    names[s] = std::move(result);
  }
  return names;
}

std::vector<ImportantEvent> rank_important_events(std::vector<ImportantEvent> events, std::span<const Timestamp> times, std::size_t n) {
  if (n < 1) fail(ErrorKind::invalid_input, "n must be at least 1");
  if (times.size() != events.size()) fail(ErrorKind::invalid_input, "timestamps do not match events");
  auto mark = [&](auto score, auto flag) {
    std::vector<std::size_t> idx(events.size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto take = std::min(n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(), [&](std::size_t a, std::size_t b) {
      const double sa = events[a].*score, sb = events[b].*score;
      if (sa != sb) return sa > sb;
      if (times[a] != times[b]) return times[a] < times[b];
      return events[a].doc_id < events[b].doc_id;
    });
    for (std::size_t k = 0; k < take; ++k) events[idx[k]].*flag = true;
  };
  mark(&ImportantEvent::content_score, &ImportantEvent::top_content);
  mark(&ImportantEvent::structure_score, &ImportantEvent::top_structure);
  for (auto& e : events) e.emphasized = e.top_content && e.top_structure;
  return events;
}

std::vector<ImportantEvent> important_events(const NarrativeMap& map, const AnalyzedCorpus& analysis, std::size_t n) {
  if (n < 1) fail(ErrorKind::invalid_input, "n must be at least 1");
  const auto& corpus = analysis.corpus();
  const auto& vec = analysis.vectors().values;
  std::map<std::string, double> content;
  for (const auto& s : map.storylines) {
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(vec.cols());
    for (const auto& id : s) centroid += vec.row(static_cast<Eigen::Index>(corpus.index_of(id)));
    centroid /= static_cast<double>(s.size());
    centroid = l2_normalized(centroid);
    for (const auto& id : s)
      content[id] = std::clamp(cosine(vec.row(static_cast<Eigen::Index>(corpus.index_of(id))), centroid), -1.0, 1.0);
  }
  std::map<std::string, double> degree;
  for (const auto& e : map.edges) {
    degree[e.from] += e.coherence.combined;
    degree[e.to] += e.coherence.combined;
  }
  std::vector<ImportantEvent> events;
  std::vector<Timestamp> times;
  for (const auto& id : map.nodes) {
    ImportantEvent ev;
    ev.doc_id = id;
    ev.content_score = content.count(id) ? content[id] : 0.0;
    ev.structure_score = degree.count(id) ? degree[id] : 0.0;
    events.push_back(std::move(ev));
    times.push_back(corpus[corpus.index_of(id)].timestamp);
  }
  return rank_important_events(std::move(events), times, n);
}

StructureExplanation explain_structure(const NarrativeMap& map, const AnalyzedCorpus& analysis, const NamingWeights& weights,
                                       std::size_t n) {
  return {name_storylines(map, analysis, weights), important_events(map, analysis, n)};
}

}  // namespace narrmap
