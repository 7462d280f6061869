#include "trialmeta/xml.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

namespace trialmeta::xml {

namespace {

class Parser {
public:
    explicit Parser(const std::string& in) : in_(in) {}

    Document run() {
        Document doc;
        while (!eof()) {
            skip_prolog_ws(doc);
            if (eof()) break;
            doc.roots.push_back(parse_node());
        }
        return doc;
    }

private:
    const std::string& in_;
    size_t pos_ = 0;

    bool eof() const { return pos_ >= in_.size(); }
    char peek(size_t ahead = 0) const {
        return pos_ + ahead < in_.size() ? in_[pos_ + ahead] : '\0';
    }
    bool starts_with(const char* s) const { return in_.compare(pos_, std::strlen(s), s) == 0; }

    [[noreturn]] void fail(const std::string& msg) const {
        int line = 1, col = 1;
        for (size_t i = 0; i < pos_ && i < in_.size(); ++i) {
            if (in_[i] == '\n') { ++line; col = 1; } else ++col;
        }
        throw ParseError(msg, pos_, line, col);
    }

    // Leading whitespace before the root element becomes a text node only if
    // we are mid-document; pure prolog whitespace is kept as text too (the
    // serializer decides what to drop).
    void skip_prolog_ws(Document& doc) {
        size_t start = pos_;
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
        if (pos_ > start) {
            Node t;
            t.kind = Node::Kind::text;
            t.name = in_.substr(start, pos_ - start);
            doc.roots.push_back(std::move(t));
        }
    }

    Node parse_node() {
        if (peek() != '<') return parse_text();
        if (starts_with("<!--")) return parse_comment();
        if (starts_with("<![CDATA[")) return parse_cdata();
        if (starts_with("<!")) return parse_doctype();
        if (starts_with("<?")) return parse_proc_inst();
        return parse_element();
    }

    Node parse_text() {
        size_t start = pos_;
        while (!eof() && peek() != '<') ++pos_;
        Node n;
        n.kind = Node::Kind::text;
        n.name = in_.substr(start, pos_ - start);
        return n;
    }

    Node parse_delimited(const char* open, const char* close, Node::Kind kind) {
        size_t start = pos_;
        pos_ += std::strlen(open);
        size_t end = in_.find(close, pos_);
        if (end == std::string::npos) fail(std::string("unterminated ") + open);
        pos_ = end + std::strlen(close);
        Node n;
        n.kind = kind;
        n.name = in_.substr(start, pos_ - start);  // raw, including delimiters
        return n;
    }

    Node parse_comment() { return parse_delimited("<!--", "-->", Node::Kind::comment); }
    Node parse_cdata() { return parse_delimited("<![CDATA[", "]]>", Node::Kind::cdata); }
    Node parse_proc_inst() { return parse_delimited("<?", "?>", Node::Kind::proc_inst); }

    Node parse_doctype() {
        // DOCTYPE may contain an internal subset in [ ]; handle bracket nesting.
        size_t start = pos_;
        pos_ += 2;  // "<!"
        int depth = 0;
        while (!eof()) {
            char c = peek();
            if (c == '[') ++depth;
            else if (c == ']') --depth;
            else if (c == '>' && depth <= 0) { ++pos_; break; }
            ++pos_;
        }
        Node n;
        n.kind = Node::Kind::doctype;
        n.name = in_.substr(start, pos_ - start);
        return n;
    }

    static bool is_name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
               c == '.' || c == ':';
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    std::string parse_name() {
        size_t start = pos_;
        while (!eof() && is_name_char(peek())) ++pos_;
        if (pos_ == start) fail("expected name");
        return in_.substr(start, pos_ - start);
    }

    Node parse_element() {
        ++pos_;  // '<'
        Node n;
        n.name = parse_name();
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated start tag <" + n.name);
            if (peek() == '/') {
                if (peek(1) != '>') fail("malformed tag end");
                pos_ += 2;
                n.self_closing = true;
                return n;
            }
            if (peek() == '>') { ++pos_; break; }
            Attribute a;
            a.name = parse_name();
            skip_ws();
            if (peek() != '=') fail("expected '=' after attribute " + a.name);
            ++pos_;
            skip_ws();
            char q = peek();
            if (q != '"' && q != '\'') fail("expected quoted attribute value");
            ++pos_;
            size_t vstart = pos_;
            while (!eof() && peek() != q) ++pos_;
            if (eof()) fail("unterminated attribute value");
            a.value = in_.substr(vstart, pos_ - vstart);
            a.quote = q;
            ++pos_;
            n.attrs.push_back(std::move(a));
        }
        // children until matching close tag
        for (;;) {
            if (eof()) fail("missing close tag for <" + n.name + ">");
            if (starts_with("</")) {
                pos_ += 2;
                std::string close = parse_name();
                if (close != n.name)
                    fail("mismatched close tag </" + close + "> for <" + n.name + ">");
                skip_ws();
                if (peek() != '>') fail("malformed close tag");
                ++pos_;
                return n;
            }
            n.children.push_back(parse_node());
        }
    }
};

bool whitespace_only(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

bool attr_stripped(const std::string& name, const std::vector<std::string>* strip) {
    if (!strip) return false;
    std::string lower = name;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return std::find(strip->begin(), strip->end(), lower) != strip->end();
}

void serialize_node(const Node& n, const SerializeOptions& opts, std::string& out) {
    switch (n.kind) {
        case Node::Kind::text:
            if (opts.minify && whitespace_only(n.name)) return;
            out += n.name;
            return;
        case Node::Kind::comment:
            if (opts.minify) return;
            out += n.name;
            return;
        case Node::Kind::cdata:
        case Node::Kind::proc_inst:
        case Node::Kind::doctype:
            out += n.name;
            return;
        case Node::Kind::element:
            break;
    }
    out += '<';
    out += n.name;
    for (const auto& a : n.attrs) {
        if (attr_stripped(a.name, opts.strip_attrs)) continue;
        out += ' ';
        out += a.name;
        out += '=';
        out += a.quote;
        out += a.value;
        out += a.quote;
    }
    if (n.self_closing && n.children.empty()) {
        out += "/>";
        return;
    }
    out += '>';
    for (const auto& c : n.children) serialize_node(c, opts, out);
    out += "</";
    out += n.name;
    out += '>';
}

}  // namespace

Document parse(const std::string& input) { return Parser(input).run(); }

std::string serialize(const Node& node, const SerializeOptions& opts) {
    std::string out;
    serialize_node(node, opts, out);
    return out;
}

std::string serialize(const Document& doc, const SerializeOptions& opts) {
    std::string out;
    for (const auto& n : doc.roots) serialize_node(n, opts, out);
    return out;
}

}  // namespace trialmeta::xml
