#pragma once

#include "narrmap/analysis.hpp"
#include "narrmap/extraction.hpp"

#include <span>
#include <string>
#include <vector>

namespace narrmap {

struct NameCandidate {
  std::string phrase;
  std::vector<std::string> tokens;  // lowercase
  bool has_entity = false;
  bool has_abstract = false;
  double c_entity = 0;
  double c_abstract = 0;
  double c_coverage = 0;
  double o_overlap = 0;
  double score = 0;
};

struct NamingWeights {
  double alpha = 1.0;  // entity presence
  double beta = 0.5;   // abstract-term presence
  double gamma = 2.0;  // storyline coverage
  double delta = 1.0;  // overlap with names already assigned
};

/// Noun phrases from each document's explanation text: maximal runs of
/// adjectives, nouns and proper nouns ending in a noun, 2-6 tokens long,
/// holding a proper noun or an abstract term. Deduplicated case-insensitively.
std::vector<NameCandidate> candidate_names(std::span<const std::size_t> storyline, const AnalyzedCorpus& analysis);

/// Fills the factors and score = alpha*entity + beta*abstract + gamma*coverage - delta*overlap.
NameCandidate score_name(NameCandidate candidate, std::span<const std::size_t> storyline, const AnalyzedCorpus& analysis,
                         std::span<const std::vector<std::string>> existing, const NamingWeights& weights);

struct StorylineName {
  std::size_t storyline = 0;  // index into map.storylines
  std::string name;
  bool fallback = false;
  NameCandidate breakdown;  // factors of the chosen candidate (zeros for fallbacks)
};

/// Names storylines from largest to smallest. Each takes its best candidate
/// (ties: higher coverage, then phrase); a candidate identical to an earlier
/// name is only used when nothing else is available. Storylines without
/// candidates are named after the top two keywords of their dominant cluster.
std::vector<StorylineName> name_storylines(const NarrativeMap& map, const AnalyzedCorpus& analysis,
                                           const NamingWeights& weights = {});

struct ImportantEvent {
  std::string doc_id;
  double content_score = 0;    // cosine to the storyline centroid
  double structure_score = 0;  // coherence-weighted degree
  bool top_content = false;
  bool top_structure = false;
  bool emphasized = false;
};

/// Marks the top-n nodes by content and by structure score (ties: earlier
/// timestamp, then id), in map node order.
std::vector<ImportantEvent> rank_important_events(std::vector<ImportantEvent> events, std::span<const Timestamp> times,
                                                  std::size_t n);

std::vector<ImportantEvent> important_events(const NarrativeMap& map, const AnalyzedCorpus& analysis, std::size_t n = 3);

struct StructureExplanation {
  std::vector<StorylineName> names;  // in storyline order
  std::vector<ImportantEvent> important;
};

StructureExplanation explain_structure(const NarrativeMap& map, const AnalyzedCorpus& analysis, const NamingWeights& weights = {},
                                       std::size_t n = 3);

}  // namespace narrmap
