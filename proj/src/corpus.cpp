#include "trialmeta/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trialmeta/xml.hpp"

namespace trialmeta::corpus {

namespace {

std::string to_lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool has_digit(const std::string& s) {
    return std::any_of(s.begin(), s.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    for (size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': in_quotes = true; row_started = true; break;
            case ',':
                row.push_back(field);
                field.clear();
                row_started = true;
                break;
            case '\r': break;
            case '\n':
                if (row_started || !field.empty() || !row.empty()) {
                    row.push_back(field);
                    rows.push_back(row);
                }
                field.clear();
                row.clear();
                row_started = false;
                break;
            default: field += c; row_started = true; break;
        }
    }
    if (row_started || !field.empty() || !row.empty()) {
        row.push_back(field);
        rows.push_back(row);
    }
    return rows;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

const std::vector<std::string>& dataset_columns() {
    static const std::vector<std::string> cols = {
        "pmcid", "intervention", "comparator", "outcome", "outcome_type",
        "intervention_events", "intervention_group_size", "comparator_events",
        "comparator_group_size", "intervention_mean", "intervention_sd",
        "comparator_mean", "comparator_sd", "is_data_in_figure_or_table"};
    return cols;
}

MaybeNumber parse_cell_or_throw(const std::string& cell, int row, const std::string& field) {
    auto parsed = MaybeNumber::parse(cell);
    if (!parsed)
        throw DataError("row " + std::to_string(row) + ": field '" + field +
                        "' is not a decimal literal or 'x': '" + cell + "'");
    return *parsed;
}

ICORecord record_from_cells(const std::map<std::string, std::string>& cells, int row) {
    auto get = [&](const std::string& key) -> std::string {
        auto it = cells.find(key);
        return it == cells.end() ? "" : it->second;
    };
    ICORecord rec;
    rec.document_id = trim(get("pmcid"));
    rec.intervention = trim(get("intervention"));
    rec.comparator = trim(get("comparator"));
    rec.outcome = trim(get("outcome"));
    if (rec.document_id.empty())
        throw DataError("row " + std::to_string(row) + ": field 'pmcid' is empty");

    auto type = outcome_type_from_string(get("outcome_type"));
    if (!type)
        throw DataError("row " + std::to_string(row) + ": field 'outcome_type' has unknown label '" +
                        get("outcome_type") + "'");
    rec.reference_type = *type;

    auto num = [&](const char* key) { return parse_cell_or_throw(get(key), row, key); };
    if (rec.reference_type == OutcomeType::binary) {
        BinaryFinding f;
        f.intervention_events = num("intervention_events");
        f.intervention_group_size = num("intervention_group_size");
        f.comparator_events = num("comparator_events");
        f.comparator_group_size = num("comparator_group_size");
        rec.reference_binary = f;
        rec.has_complete_reference = f.all_known();
    } else if (rec.reference_type == OutcomeType::continuous) {
        ContinuousFinding f;
        f.intervention_mean = num("intervention_mean");
        f.intervention_sd = num("intervention_sd");
        f.intervention_group_size = num("intervention_group_size");
        f.comparator_mean = num("comparator_mean");
        f.comparator_sd = num("comparator_sd");
        f.comparator_group_size = num("comparator_group_size");
        rec.reference_continuous = f;
        rec.has_complete_reference = f.all_known();
    }

    std::string fig = to_lower(trim(get("is_data_in_figure_or_table")));
    if (fig == "true" || fig == "1") rec.in_table_or_figure = true;
    else if (fig == "false" || fig == "0" || fig.empty()) rec.in_table_or_figure = false;
    else
        throw DataError("row " + std::to_string(row) +
                        ": field 'is_data_in_figure_or_table' must be true/false, got '" + fig + "'");
    return rec;
}

std::vector<ICORecord> load_csv(const std::string& content) {
    auto rows = parse_csv(content);
    if (rows.empty()) throw DataError("dataset is empty (missing header)");
    std::vector<std::string> header;
    for (const auto& h : rows[0]) header.push_back(to_lower(trim(h)));
    std::vector<ICORecord> out;
    for (size_t r = 1; r < rows.size(); ++r) {
        std::map<std::string, std::string> cells;
        for (size_t c = 0; c < rows[r].size() && c < header.size(); ++c)
            cells[header[c]] = rows[r][c];
        out.push_back(record_from_cells(cells, static_cast<int>(r)));
    }
    return out;
}

std::vector<ICORecord> load_jsonl(const std::string& content) {
    std::vector<ICORecord> out;
    std::istringstream in(content);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("row " + std::to_string(row) + ": invalid JSON: " + e.what());
        }
        std::map<std::string, std::string> cells;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.value().is_string()) cells[it.key()] = it.value().get<std::string>();
            else if (it.value().is_boolean()) cells[it.key()] = it.value().get<bool>() ? "true" : "false";
            else if (it.value().is_number()) cells[it.key()] = it.value().dump();
            else if (it.value().is_null()) cells[it.key()] = "";
            else cells[it.key()] = it.value().dump();
        }
        out.push_back(record_from_cells(cells, row));
    }
    return out;
}

}  // namespace

std::vector<ICORecord> load_annotations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") return load_jsonl(content);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") return load_jsonl(content);
    return load_csv(content);
}

std::string serialize_annotations_csv(const std::vector<ICORecord>& records) {
    std::ostringstream out;
    const auto& cols = dataset_columns();
    for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : records) {
        BinaryFinding b = r.reference_binary.value_or(BinaryFinding{});
        ContinuousFinding c = r.reference_continuous.value_or(ContinuousFinding{});
        std::vector<std::string> cells = {
            r.document_id,
            r.intervention,
            r.comparator,
            r.outcome,
            to_string(r.reference_type),
            b.intervention_events.to_string(),
            b.intervention_group_size.to_string(),
            b.comparator_events.to_string(),
            b.comparator_group_size.to_string(),
            c.intervention_mean.to_string(),
            c.intervention_sd.to_string(),
            c.comparator_mean.to_string(),
            c.comparator_sd.to_string(),
            r.in_table_or_figure ? "true" : "false"};
        // group sizes for continuous live in the same columns as means/sds block;
        // the schema shares intervention_group_size/comparator_group_size with binary
        if (r.reference_continuous) {
            cells[6] = c.intervention_group_size.to_string();
            cells[8] = c.comparator_group_size.to_string();
        }
        for (size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_escape(cells[i]);
        out << "\n";
    }
    return out.str();
}

void save_annotations_csv(const std::vector<ICORecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << serialize_annotations_csv(records);
}

// ---------------------------------------------------------------------------
// XML preprocessing

const std::vector<std::string>& presentational_attributes() {
    // Removal allowlist; anything not listed is kept.
    static const std::vector<std::string> attrs = {
        "style",       "class",       "align",   "valign",      "width",
        "height",      "border",      "frame",   "rules",       "cellpadding",
        "cellspacing", "bgcolor",     "color",   "face",        "size",
        "char",        "charoff",     "indent",  "orientation", "position"};
    return attrs;
}

std::string preprocess_xml(const std::string& raw_xml) {
    xml::Document doc = xml::parse(raw_xml);
    xml::SerializeOptions opts;
    opts.minify = true;
    opts.strip_attrs = &presentational_attributes();
    return xml::serialize(doc, opts);
}

// ---------------------------------------------------------------------------
// Markdown conversion

namespace {

bool is_section_tag(const std::string& name) {
    return name == "sec" || name == "abstract" || name == "app" || name == "boxed-text" ||
           name == "body";
}

std::string node_raw_text(const xml::Node& n) {
    if (n.kind == xml::Node::Kind::text) return n.name;
    if (n.kind == xml::Node::Kind::cdata) {
        // strip <![CDATA[ ... ]]>
        if (n.name.size() >= 12) return n.name.substr(9, n.name.size() - 12);
        return "";
    }
    return "";
}

void collect_text(const xml::Node& n, std::string& out) {
    if (n.kind != xml::Node::Kind::element) {
        out += node_raw_text(n);
        return;
    }
    for (const auto& c : n.children) collect_text(c, out);
}

// Whitespace-collapsed inline text of a subtree.
std::string inline_text(const xml::Node& n) {
    std::string raw;
    collect_text(n, raw);
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

std::string escape_cell(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

void collect_rows(const xml::Node& n, std::vector<const xml::Node*>& rows) {
    if (n.is_element("tr")) {
        rows.push_back(&n);
        return;
    }
    if (n.kind != xml::Node::Kind::element) return;
    for (const auto& c : n.children) collect_rows(c, rows);
}

std::vector<std::string> row_cells(const xml::Node& tr) {
    std::vector<std::string> cells;
    for (const auto& c : tr.children)
        if (c.is_element("td") || c.is_element("th")) cells.push_back(escape_cell(inline_text(c)));
    return cells;
}

void emit_table(const xml::Node& table, std::string& out) {
    // Rows under <thead> become the markdown header; without one, a blank
    // header row is synthesized so every source row survives as a data row.
    std::vector<const xml::Node*> head_rows, body_rows;
    for (const auto& c : table.children) {
        if (c.is_element("thead")) collect_rows(c, head_rows);
        else collect_rows(c, body_rows);
    }
    size_t ncols = 0;
    auto width = [&](const std::vector<const xml::Node*>& rows) {
        for (const auto* r : rows) ncols = std::max(ncols, row_cells(*r).size());
    };
    width(head_rows);
    width(body_rows);
    if (ncols == 0) {
        // row-less table: degrade to a paragraph so no content is lost
        std::string text = inline_text(table);
        if (!text.empty()) out += text + "\n\n";
        return;
    }

    auto emit_row = [&](const std::vector<std::string>& cells) {
        out += "|";
        for (size_t i = 0; i < ncols; ++i) {
            out += " ";
            if (i < cells.size()) out += cells[i];
            out += " |";
        }
        out += "\n";
    };
    if (!head_rows.empty()) {
        emit_row(row_cells(*head_rows.front()));
    } else {
        emit_row(std::vector<std::string>(ncols, ""));
    }
    out += "|";
    for (size_t i = 0; i < ncols; ++i) out += " --- |";
    out += "\n";
    for (size_t i = 1; i < head_rows.size(); ++i) emit_row(row_cells(*head_rows[i]));
    for (const auto* r : body_rows) emit_row(row_cells(*r));
    out += "\n";
}

void emit_markdown(const xml::Node& n, int sec_depth, std::string& out) {
    if (n.kind != xml::Node::Kind::element) {
        std::string text = inline_text(n);
        if (!text.empty()) out += text + "\n\n";
        return;
    }
    if (n.is_element("title") || n.is_element("article-title")) {
        std::string text = inline_text(n);
        if (!text.empty()) {
            int level = std::min(6, std::max(1, sec_depth + (sec_depth == 0 ? 1 : 0)));
            out += std::string(static_cast<size_t>(level), '#') + " " + text + "\n\n";
        }
        return;
    }
    if (n.is_element("p") || n.is_element("label") || n.is_element("caption")) {
        std::string text = inline_text(n);
        if (!text.empty()) out += text + "\n\n";
        return;
    }
    if (n.is_element("table")) {
        emit_table(n, out);
        return;
    }
    if (n.is_element("list") || n.is_element("ul") || n.is_element("ol")) {
        for (const auto& c : n.children) {
            if (c.is_element("list-item") || c.is_element("li")) {
                std::string text = inline_text(c);
                if (!text.empty()) out += "- " + text + "\n";
            }
        }
        out += "\n";
        return;
    }
    int next_depth = sec_depth + (is_section_tag(n.name) ? 1 : 0);
    for (const auto& c : n.children) emit_markdown(c, next_depth, out);
}

}  // namespace

std::string xml_to_markdown(const std::string& compact_xml) {
    xml::Document doc = xml::parse(compact_xml);
    std::string out;
    for (const auto& n : doc.roots) emit_markdown(n, 0, out);
    // collapse trailing blank lines
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    if (!out.empty()) out += "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Number-word normalization

namespace {

const std::map<std::string, int>& number_words() {
    static const std::map<std::string, int> words = {
        {"zero", 0},     {"one", 1},       {"two", 2},       {"three", 3},
        {"four", 4},     {"five", 5},      {"six", 6},       {"seven", 7},
        {"eight", 8},    {"nine", 9},      {"ten", 10},      {"eleven", 11},
        {"twelve", 12},  {"thirteen", 13}, {"fourteen", 14}, {"fifteen", 15},
        {"sixteen", 16}, {"seventeen", 17},{"eighteen", 18}, {"nineteen", 19},
        {"twenty", 20},  {"thirty", 30},   {"forty", 40},    {"fifty", 50},
        {"sixty", 60},   {"seventy", 70},  {"eighty", 80},   {"ninety", 90},
        {"hundred", 100}};
    return words;
}

bool is_tens(int v) { return v >= 20 && v <= 90 && v % 10 == 0; }
bool is_unit(int v) { return v >= 1 && v <= 9; }

}  // namespace

std::string normalize_numbers(const std::string& text) {
    const auto& words = number_words();
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    const size_t n = text.size();
    auto is_letter = [&](size_t p) {
        return p < n && std::isalpha(static_cast<unsigned char>(text[p]));
    };
    auto is_alnum = [&](size_t p) {
        return p < n && std::isalnum(static_cast<unsigned char>(text[p]));
    };
    while (i < n) {
        char c = text[i];
        // collapse runs of 2+ hyphens immediately before a digit into one minus
        if (c == '-') {
            size_t j = i;
            while (j < n && text[j] == '-') ++j;
            if (j - i >= 2 && j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
                out += '-';
                i = j;
                continue;
            }
            out += c;
            ++i;
            continue;
        }
        if (!is_letter(i)) {
            out += c;
            ++i;
            continue;
        }
        size_t start = i;
        while (is_letter(i)) ++i;
        std::string word = text.substr(start, i - start);
        std::string lower = to_lower(word);
        auto it = words.find(lower);
        bool preceded_by_hyphen = start > 0 && text[start - 1] == '-';
        if (it == words.end() || preceded_by_hyphen || is_alnum(i) ) {
            out += word;
            continue;
        }
        int value = it->second;
        // "twenty-one" style compound
        if (is_tens(value) && i < n && text[i] == '-') {
            size_t unit_start = i + 1;
            size_t k = unit_start;
            while (k < n && std::isalpha(static_cast<unsigned char>(text[k]))) ++k;
            std::string unit_word = to_lower(text.substr(unit_start, k - unit_start));
            auto uit = words.find(unit_word);
            if (uit != words.end() && is_unit(uit->second) && !is_alnum(k)) {
                out += std::to_string(value + uit->second);
                i = k;
                continue;
            }
            if (k > unit_start) {  // "twenty-first" and friends: leave untouched
                out += word;
                continue;
            }
        }
        // "<unit> hundred"
        if (is_unit(value) || (value >= 1 && value <= 19)) {
            size_t k = i;
            while (k < n && (text[k] == ' ' || text[k] == '\t')) ++k;
            if (k > i && k + 7 <= n && to_lower(text.substr(k, 7)) == "hundred" && !is_alnum(k + 7)) {
                out += std::to_string(value * 100);
                i = k + 7;
                continue;
            }
        }
        // an ordinal-ish suffix joined by hyphen disqualifies a unit too ("one-sided" stays)
        if (i < n && text[i] == '-' && is_letter(i + 1)) {
            size_t k = i + 1;
            while (is_letter(k)) ++k;
            std::string suffix = to_lower(text.substr(i + 1, k - i - 1));
            if (words.find(suffix) == words.end()) {
                out += word;
                continue;
            }
        }
        out += std::to_string(value);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chunking

namespace {

// Sentences end at [.?!] followed by whitespace and an uppercase letter or
// digit. Pipe-table rows are atomic segments.
std::vector<std::string> split_segments(const std::string& markdown) {
    std::vector<std::string> segments;
    std::istringstream in(markdown);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '|') {
            segments.push_back(t);
            continue;
        }
        size_t start = 0;
        for (size_t i = 0; i + 1 < t.size(); ++i) {
            char c = t[i];
            if (c != '.' && c != '?' && c != '!') continue;
            size_t j = i + 1;
            while (j < t.size() && (t[j] == ' ' || t[j] == '\t')) ++j;
            if (j == i + 1 || j >= t.size()) continue;
            unsigned char next = static_cast<unsigned char>(t[j]);
            if (std::isupper(next) || std::isdigit(next) || next == '(') {
                segments.push_back(trim(t.substr(start, i + 1 - start)));
                start = j;
                i = j - 1;
            }
        }
        if (start < t.size()) segments.push_back(trim(t.substr(start)));
    }
    return segments;
}

}  // namespace

std::vector<Chunk> chunk_document(const std::string& markdown, int token_limit,
                                  const std::string& document_id, const Tokenizer& tok) {
    if (token_limit <= 0) throw DomainError("chunk_document: token_limit must be positive");
    std::vector<Chunk> chunks;
    auto push_chunk = [&](std::string text, bool hard_split) {
        Chunk c;
        c.document_id = document_id;
        c.index = static_cast<int>(chunks.size());
        c.text = std::move(text);
        c.token_count = tok.count(c.text);
        c.hard_split = hard_split;
        chunks.push_back(std::move(c));
    };

    std::string current;
    int current_tokens = 0;
    auto flush = [&] {
        if (!current.empty()) {
            push_chunk(current, false);
            current.clear();
            current_tokens = 0;
        }
    };

    for (const auto& seg : split_segments(markdown)) {
        if (!has_digit(seg)) continue;
        int seg_tokens = tok.count(seg);
        if (seg_tokens > token_limit) {
            flush();
            auto spans = tok.spans(seg);
            for (size_t k = 0; k < spans.size(); k += static_cast<size_t>(token_limit)) {
                size_t last = std::min(k + static_cast<size_t>(token_limit), spans.size()) - 1;
                size_t begin = spans[k].first;
                size_t end = spans[last].second;
                push_chunk(seg.substr(begin, end - begin), true);
            }
            continue;
        }
        if (current_tokens + seg_tokens > token_limit) flush();
        if (current.empty()) {
            current = seg;
            current_tokens = seg_tokens;
        } else {
            current += "\n" + seg;
            current_tokens = tok.count(current);
        }
    }
    flush();
    return chunks;
}

TrialDocument make_document(const std::string& id, const std::string& abstract_xml,
                            const std::string& results_xml, const Tokenizer& tok) {
    TrialDocument doc;
    doc.id = id;
    doc.abstract_xml = abstract_xml;
    doc.results_xml = results_xml;
    std::string md;
    if (!abstract_xml.empty()) md += xml_to_markdown(preprocess_xml(abstract_xml));
    if (!results_xml.empty()) {
        if (!md.empty()) md += "\n";
        md += xml_to_markdown(preprocess_xml(results_xml));
    }
    doc.markdown = md;
    doc.token_count = tok.count(doc.markdown);
    return doc;
}

}  // namespace trialmeta::corpus
