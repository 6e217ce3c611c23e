#include "tfp/validator.hpp"

#include <limits>
#include <map>

#include "tfp/xml.hpp"

namespace tfp {

namespace {

using xml::Element;

struct Checker {
  std::vector<Diagnostic> out;
  TestScript script;

  void report(int rule, const Element& at, std::string message) {
    out.push_back({rule, severity_of_rule(rule), at.name + ":" + std::to_string(at.line), std::move(message)});
  }

  static bool in_script_ns(const Element& e) { return e.ns.empty() || e.ns == kScriptNs; }

  /// Groups children by name; anything not in `known` earns a V8 warning.
  std::map<std::string, std::vector<const Element*>> group(const Element& parent,
                                                           std::initializer_list<std::string_view> known) {
    std::map<std::string, std::vector<const Element*>> by_name;
    for (const auto& child : parent.children) {
      bool listed = false;
      for (auto k : known) listed = listed || k == child.name;
      if (listed && in_script_ns(child)) {
        by_name[child.name].push_back(&child);
      } else {
        report(8, child, "unknown element '" + child.name + "' in '" + parent.name + "' is ignored");
      }
    }
    if (!trim(parent.text).empty()) report(8, parent, "text inside '" + parent.name + "' is ignored");
    return by_name;
  }

  /// The single occurrence of a leaf, or nullptr after reporting under `rule`.
  const Element* single(const std::map<std::string, std::vector<const Element*>>& by_name, const Element& parent,
                        std::string_view name, int rule, bool required = true) {
    auto it = by_name.find(std::string(name));
    if (it == by_name.end()) {
      if (required) report(rule, parent, std::string(name) + " is missing");
      return nullptr;
    }
    if (it->second.size() > 1) {
      report(rule, *it->second[1], std::string(name) + " appears more than once");
      return nullptr;
    }
    const Element* e = it->second.front();
    if (!e->children.empty()) {
      report(rule, *e, std::string(name) + " must hold text, not elements");
      return nullptr;
    }
    return e;
  }

  void check_case(const Element& c) {
    auto kids = group(c, {"url", "method", "message"});
    if (const auto* url = single(kids, c, "url", 3)) {
      if (auto n = normalize_url(url->text)) {
        script.test_case.url = n->url;
        if (n->scheme_added) report(8, *url, "url has no scheme; using " + n->url);
      } else {
        report(3, *url, "url '" + std::string(trim(url->text)) + "' is not an absolute http/https URL");
      }
    }
    std::optional<HttpMethod> method;
    if (const auto* m = single(kids, c, "method", 4)) {
      method = parse_method(m->text);
      if (method) script.test_case.method = *method;
      else report(4, *m, "method '" + std::string(trim(m->text)) + "' is not GET or POST");
    }
    const Element* message = nullptr;
    if (auto it = kids.find("message"); it != kids.end()) {
      if (it->second.size() > 1) {
        report(5, *it->second[1], "message appears more than once");
      } else if (!it->second.front()->children.empty()) {
        report(5, *it->second.front(), "message must hold text, not elements");
      } else {
        message = it->second.front();
        script.test_case.message = message->text;
      }
    }
    if (method == HttpMethod::Get && message) report(5, *message, "GET must not carry a message");
    if (method == HttpMethod::Post && kids.find("message") == kids.end()) report(5, c, "POST requires a message");
  }

  void check_criteria(const Element& c) {
    auto kids = group(c, {"response", "tps", "bps"});
    auto number = [&](std::string_view name, double& slot) {
      if (const auto* e = single(kids, c, name, 6)) {
        auto v = parse_decimal(e->text);
        if (!v) report(6, *e, std::string(name) + " '" + std::string(trim(e->text)) + "' is not a number");
        else if (*v <= 0.0) report(6, *e, std::string(name) + " must be greater than 0");
        else slot = *v;
      }
    };
    number("response", script.criteria.response_ms);
    number("tps", script.criteria.tps);
    number("bps", script.criteria.bps);
  }

  std::optional<std::int64_t> positive_int(const std::map<std::string, std::vector<const Element*>>& kids,
                                           const Element& parent, std::string_view name) {
    const auto* e = single(kids, parent, name, 7);
    if (!e) return std::nullopt;
    auto v = parse_integer(e->text);
    if (!v || *v < 1 || *v > std::numeric_limits<int>::max()) {
      report(7, *e, std::string(name) + " must be a positive integer");
      return std::nullopt;
    }
    return v;
  }

  void check_load(const Element& l) {
    auto kids = group(l, {"requests", "concurrency"});
    auto requests = positive_int(kids, l, "requests");
    auto concurrency = positive_int(kids, l, "concurrency");
    if (requests && concurrency) {
      if (*concurrency > *requests) report(7, l, "concurrency must not exceed requests");
      script.load = LoadProfile{static_cast<int>(*requests), static_cast<int>(*concurrency)};
    }
  }

  void check_adaptive(const Element& a) {
    auto kids = group(a, {"startConcurrency", "growthFactor", "maxIterations", "requestsPerIteration"});
    AdaptiveParams p;
    auto start = positive_int(kids, a, "startConcurrency");
    auto iterations = positive_int(kids, a, "maxIterations");
    auto per_iteration = positive_int(kids, a, "requestsPerIteration");
    std::optional<double> growth;
    if (const auto* g = single(kids, a, "growthFactor", 7)) {
      growth = parse_decimal(g->text);
      if (!growth || *growth <= 1.0) {
        report(7, *g, "growthFactor must be a number greater than 1");
        growth.reset();
      }
    }
    if (start && iterations && per_iteration && growth) {
      p.start_concurrency = static_cast<int>(*start);
      p.max_iterations = static_cast<int>(*iterations);
      p.requests_per_iteration = static_cast<int>(*per_iteration);
      p.growth_factor = *growth;
      script.adaptive = p;
    }
  }

  void run(std::string_view text) {
    Element root;
    try {
      root = xml::parse(text);
    } catch (const Error& e) {
      out.push_back({1, Severity::Error, "document", e.detail()});
      return;
    }
    if (!root.is(kScriptNs, "testScript")) {
      report(2, root, "root must be 'testScript' in namespace " + std::string(kScriptNs));
      return;
    }
    auto kids = group(root, {"case", "criteria", "load", "adaptive"});
    for (auto name : {"case", "criteria"}) {
      auto n = kids.count(name) ? kids[name].size() : 0;
      if (n == 0) report(2, root, std::string("exactly one '") + name + "' is required, found none");
      if (n > 1) report(2, *kids[name][1], std::string("exactly one '") + name + "' is required, found " + std::to_string(n));
    }
    if (kids.count("case") && kids["case"].size() == 1) check_case(*kids["case"].front());
    if (kids.count("criteria") && kids["criteria"].size() == 1) check_criteria(*kids["criteria"].front());
    for (auto name : {"load", "adaptive"}) {
      if (!kids.count(name)) continue;
      if (kids[name].size() > 1) {
        report(7, *kids[name][1], std::string(name) + " appears more than once");
      } else if (std::string_view(name) == "load") {
        check_load(*kids[name].front());
      } else {
        check_adaptive(*kids[name].front());
      }
    }
  }
};

}  // namespace

Severity severity_of_rule(int rule) noexcept { return rule == 8 ? Severity::Warning : Severity::Error; }

std::string format_diagnostic(const Diagnostic& d) {
  return std::string(d.severity == Severity::Error ? "ERROR" : "WARNING") + " V" + std::to_string(d.rule) + " " +
         d.locator + ": " + d.message;
}

InvalidScriptError::InvalidScriptError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorCode::InvalidScript,
            diagnostics.empty() ? std::string() : format_diagnostic(diagnostics.front()) +
                                                      (diagnostics.size() > 1 ? " (and more)" : "")),
      diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> validate_script(std::string_view text) {
  Checker c;
  c.run(text);
  return std::move(c.out);
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) noexcept {
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::Error) return true;
  }
  return false;
}

ParsedScript parse_script(std::string_view text) {
  Checker c;
  c.run(text);
  ParsedScript parsed;
  std::vector<Diagnostic> errors;
  for (auto& d : c.out) {
    (d.severity == Severity::Error ? errors : parsed.warnings).push_back(std::move(d));
  }
  if (!errors.empty()) throw InvalidScriptError(std::move(errors));
  parsed.script = std::move(c.script);
  return parsed;
}

std::string render_script(const TestScript& s) {
  xml::Writer w;
  w.open("tfp:testScript", {{"xmlns:tfp", std::string(kScriptNs)}});
  w.open("case");
  w.leaf("url", s.test_case.url);
  w.leaf("method", to_string(s.test_case.method));
  if (s.test_case.message) w.leaf("message", *s.test_case.message);
  w.close();
  w.open("criteria");
  w.leaf("response", format_decimal(s.criteria.response_ms));
  w.leaf("tps", format_decimal(s.criteria.tps));
  w.leaf("bps", format_decimal(s.criteria.bps));
  w.close();
  if (s.load) {
    w.open("load");
    w.leaf("requests", std::to_string(s.load->requests));
    w.leaf("concurrency", std::to_string(s.load->concurrency));
    w.close();
  }
  if (s.adaptive) {
    w.open("adaptive");
    w.leaf("startConcurrency", std::to_string(s.adaptive->start_concurrency));
    w.leaf("growthFactor", format_decimal(s.adaptive->growth_factor));
    w.leaf("maxIterations", std::to_string(s.adaptive->max_iterations));
    w.leaf("requestsPerIteration", std::to_string(s.adaptive->requests_per_iteration));
    w.close();
  }
  w.close();
  return w.str();
}

}  // namespace tfp
