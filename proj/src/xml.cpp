#include "tfp/xml.hpp"

#include <expat.h>

#include <cstdint>
#include <memory>

#include "tfp/error.hpp"

namespace tfp::xml {

namespace {

constexpr char kNsSeparator = '\x01';
constexpr std::size_t kMaxDepth = 64;

struct Builder {
  XML_Parser parser = nullptr;
  Element root;
  bool have_root = false;
  std::vector<Element*> stack;
  std::string failure;

  void fail(std::string why) {
    if (failure.empty()) failure = std::move(why);
    XML_StopParser(parser, XML_FALSE);
  }
};

void split_name(const XML_Char* raw, std::string& ns, std::string& local) {
  std::string_view full(raw);
  auto sep = full.find(kNsSeparator);
  if (sep == std::string_view::npos) {
    ns.clear();
    local = std::string(full);
  } else {
    ns = std::string(full.substr(0, sep));
    local = std::string(full.substr(sep + 1));
  }
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto* b = static_cast<Builder*>(data);
  if (b->stack.size() >= kMaxDepth) {
    b->fail("elements nested deeper than 64 levels");
    return;
  }
  Element e;
  split_name(name, e.ns, e.name);
  e.line = static_cast<int>(XML_GetCurrentLineNumber(b->parser));
  for (auto a = attrs; a && *a; a += 2) {
    std::string ans, alocal;
    split_name(a[0], ans, alocal);
    e.attributes[alocal] = a[1];
  }
  Element* slot;
  if (b->stack.empty()) {
    b->root = std::move(e);
    b->have_root = true;
    slot = &b->root;
  } else {
    auto& kids = b->stack.back()->children;
    kids.push_back(std::move(e));
    slot = &kids.back();
  }
  b->stack.push_back(slot);
}

void XMLCALL on_end(void* data, const XML_Char*) {
  auto* b = static_cast<Builder*>(data);
  if (!b->stack.empty()) b->stack.pop_back();
}

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
  auto* b = static_cast<Builder*>(data);
  if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

void XMLCALL on_doctype(void* data, const XML_Char*, const XML_Char*, const XML_Char*, int) {
  static_cast<Builder*>(data)->fail("document type declarations are not accepted");
}

}  // namespace

Element parse(std::string_view document) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreateNS("UTF-8", kNsSeparator), &XML_ParserFree);
  if (!parser) throw Error(ErrorCode::MalformedXml, "cannot allocate parser");
  Builder b;
  b.parser = parser.get();
  XML_SetUserData(parser.get(), &b);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);
  XML_SetStartDoctypeDeclHandler(parser.get(), on_doctype);

  // Only the innermost open element gains children, so the pointers held on
  // the builder stack are never invalidated by a vector reallocation.
  auto status = XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE);
  if (status != XML_STATUS_OK) {
    std::string why = b.failure.empty() ? XML_ErrorString(XML_GetErrorCode(parser.get())) : b.failure;
    throw Error(ErrorCode::MalformedXml,
                "line " + std::to_string(XML_GetCurrentLineNumber(parser.get())) + ": " + why);
  }
  if (!b.have_root) throw Error(ErrorCode::MalformedXml, "no root element");
  return std::move(b.root);
}

bool is_xml_safe(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (c < 0x20 && c != '\t' && c != '\n' && c != '\r') return false;
      ++i;
      continue;
    }
    std::size_t len;
    std::uint32_t cp;
    if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
    else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
    else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
    else return false;
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    const std::uint32_t min_cp[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_cp[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF) || cp == 0xFFFE || cp == 0xFFFF)
      return false;
    i += len;
  }
  return true;
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\r': out += "&#13;"; break;  // parsers fold raw CR into LF
      default: out += c;
    }
  }
  return out;
}

Writer::Writer() { out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

void Writer::indent() { out_.append(stack_.size() * 2, ' '); }

void Writer::open(std::string_view qname, const Attributes& attrs) {
  indent();
  out_ += '<';
  out_ += qname;
  for (const auto& [k, v] : attrs) {
    out_ += ' ';
    out_ += k;
    out_ += "=\"";
    out_ += escape(v);
    out_ += '"';
  }
  out_ += ">\n";
  stack_.emplace_back(qname);
}

void Writer::leaf(std::string_view qname, std::string_view text) {
  indent();
  out_ += '<';
  out_ += qname;
  out_ += '>';
  out_ += escape(text);
  out_ += "</";
  out_ += qname;
  out_ += ">\n";
}

void Writer::empty(std::string_view qname) {
  indent();
  out_ += '<';
  out_ += qname;
  out_ += "/>\n";
}

void Writer::close() {
  auto name = std::move(stack_.back());
  stack_.pop_back();
  indent();
  out_ += "</";
  out_ += name;
  out_ += ">\n";
}

}  // namespace tfp::xml
