#ifndef TRIALMETA_XML_HPP
#define TRIALMETA_XML_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace trialmeta::xml {

struct ParseError : std::runtime_error {
    size_t offset;
    int line;
    int column;
    ParseError(const std::string& msg, size_t off, int ln, int col)
        : std::runtime_error(msg + " at line " + std::to_string(ln) + ", column " +
                             std::to_string(col)),
          offset(off), line(ln), column(col) {}
};

struct Attribute {
    std::string name;
    std::string value;      // raw value, entities not decoded
    char quote = '"';       // original quote character
};

// Minimal DOM. Text nodes keep their raw source bytes so that re-serialization
// never alters character data.
struct Node {
    enum class Kind { element, text, comment, cdata, proc_inst, doctype };
    Kind kind = Kind::element;
    std::string name;                 // element name, or raw content for non-elements
    std::vector<Attribute> attrs;
    std::vector<Node> children;
    bool self_closing = false;

    bool is_element(const std::string& n) const { return kind == Kind::element && name == n; }
};

struct Document {
    std::vector<Node> roots;  // prolog nodes plus the root element
};

Document parse(const std::string& input);

struct SerializeOptions {
    bool minify = false;                              // drop whitespace-only text and comments
    const std::vector<std::string>* strip_attrs = nullptr;  // lowercase names to remove
};

std::string serialize(const Document& doc, const SerializeOptions& opts = {});
std::string serialize(const Node& node, const SerializeOptions& opts = {});

}  // namespace trialmeta::xml

#endif
