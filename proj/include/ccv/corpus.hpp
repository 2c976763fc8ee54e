#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ccv {

struct CorpusEntry {
  std::string name;
  std::string source;    // S-expression
  std::string expected;  // what a replay must show
};

const std::vector<CorpusEntry>& corpus();
std::optional<CorpusEntry> corpus_entry(const std::string& name);

// Shared pieces of the entries.
std::string y_combinator(const std::string& d_body);  // λf.λz. D D z with D = d_body
std::string y_eta();                                  // D_f = λx.λw.f(λv.xxv)w
std::string y_plain();                                // D_f = λx.f(xx)

struct CorpusReport {
  bool ok = false;
  std::vector<std::string> lines;  // JSON lines
};
// Deterministic replay: same entry and fuel give identical lines.
CorpusReport replay(const CorpusEntry& e, std::size_t fuel);

}  // namespace ccv
