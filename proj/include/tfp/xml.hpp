#pragma once

// Small namespace-aware DOM over expat, and a deterministic writer. Enough
// for the fixed document shapes exchanged between the tiers; not a general
// XML toolkit.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tfp::xml {

struct Element {
  std::string ns;    // namespace URI, empty when unqualified
  std::string name;  // local name
  std::map<std::string, std::string> attributes;
  std::string text;  // character data directly inside this element
  std::vector<Element> children;
  int line = 0;

  bool is(std::string_view uri, std::string_view local) const { return ns == uri && name == local; }
};

/// Throws Error(E_MALFORMED_XML) on anything expat rejects, on DTDs, and on
/// nesting deeper than 64 levels.
Element parse(std::string_view document);

/// True when the text is valid UTF-8 and holds only characters XML 1.0
/// can carry.
bool is_xml_safe(std::string_view text) noexcept;

std::string escape(std::string_view text);

class Writer {
 public:
  Writer();

  using Attributes = std::vector<std::pair<std::string, std::string>>;

  void open(std::string_view qname, const Attributes& attrs = {});
  void leaf(std::string_view qname, std::string_view text);
  void empty(std::string_view qname);
  void close();

  std::string str() const { return out_; }

 private:
  void indent();

  std::string out_;
  std::vector<std::string> stack_;
};

}  // namespace tfp::xml
