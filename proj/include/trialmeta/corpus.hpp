#ifndef TRIALMETA_CORPUS_HPP
#define TRIALMETA_CORPUS_HPP

#include <string>
#include <vector>

#include "trialmeta/tokenizer.hpp"
#include "trialmeta/types.hpp"

namespace trialmeta::corpus {

/// Loads ICO reference annotations from a CSV or JSON-lines dataset file
/// (format chosen by extension). Blank numeric cells become unknown.
std::vector<ICORecord> load_annotations(const std::string& path);

/// Inverse of load_annotations; CSV with the dataset column set.
std::string serialize_annotations_csv(const std::vector<ICORecord>& records);
void save_annotations_csv(const std::vector<ICORecord>& records, const std::string& path);

/// Minifies XML (inter-tag whitespace and comments dropped) and strips the
/// documented presentational attributes. Character data is untouched.
std::string preprocess_xml(const std::string& raw_xml);

/// Attributes removed by preprocess_xml (lowercase names). Unrecognized
/// attributes are kept.
const std::vector<std::string>& presentational_attributes();

/// Converts compact XML to markdown: titles become headings at their section
/// nesting depth, tables become pipe tables, paragraphs stay in order.
std::string xml_to_markdown(const std::string& compact_xml);

/// Converts standalone English number words (up to "hundred", including
/// "twenty-one" style compounds) to digits, and collapses runs of two or more
/// hyphens before a digit into a single minus sign. Ordinals are left alone.
std::string normalize_numbers(const std::string& text);

/// Splits markdown into sentences/table-rows, drops segments without digits,
/// and greedily concatenates the rest into chunks of at most token_limit
/// tokens. An oversize single segment is hard-split and flagged.
std::vector<Chunk> chunk_document(const std::string& markdown, int token_limit,
                                  const std::string& document_id = "",
                                  const Tokenizer& tok = default_tokenizer());

/// Builds the derived fields of a TrialDocument from its XML sections.
TrialDocument make_document(const std::string& id, const std::string& abstract_xml,
                            const std::string& results_xml,
                            const Tokenizer& tok = default_tokenizer());

}  // namespace trialmeta::corpus

#endif
