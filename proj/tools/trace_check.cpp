// trace_check: cross-checks the theory-to-code traceability table against
// the library headers and the acceptance suite. Exits nonzero and lists
// every dangling or duplicate anchor. Wired into ctest.
//
// usage: trace_check <theory_map.json> <core_include_dir> <acceptance_source>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Token (identifier-boundary) search.
bool contains_token(const std::string& text, const std::string& token) {
  std::size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_ident_char(text[pos - 1]);
    const std::size_t end = pos + token.size();
    const bool right_ok = end >= text.size() || !is_ident_char(text[end]);
    if (left_ok && right_ok) return true;
    pos = end;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: trace_check <theory_map.json> <core_include_dir> <acceptance_source>\n";
    return 2;
  }
  const std::filesystem::path table_path = argv[1];
  const std::filesystem::path include_dir = argv[2];
  const std::filesystem::path acceptance_path = argv[3];

  nlohmann::json table;
  try {
    table = nlohmann::json::parse(read_file(table_path));
  } catch (const std::exception& e) {
    std::cerr << "trace_check: cannot parse table: " << e.what() << "\n";
    return 2;
  }
  if (!table.is_object() || !table.contains("entries") || !table["entries"].is_array()) {
    std::cerr << "trace_check: table must be an object with an 'entries' array\n";
    return 2;
  }

  // Manifest: header text per module, from the installed header set.
  std::map<std::string, std::string> headers;
  for (const auto& entry : std::filesystem::directory_iterator(include_dir / "lsp")) {
    if (entry.path().extension() == ".hpp") {
      headers[entry.path().stem().string()] = read_file(entry.path());
    }
  }
  const std::string acceptance_text = read_file(acceptance_path);

  std::vector<std::string> problems;
  std::set<std::string> seen_ids;
  for (const auto& row : table["entries"]) {
    const std::string id = row.value("id", "");
    if (id.empty()) {
      problems.push_back("entry without id");
      continue;
    }
    if (!seen_ids.insert(id).second) {
      problems.push_back("duplicate anchor: " + id);
    }
    if (row.value("statement", "").empty()) {
      problems.push_back(id + ": missing statement");
    }

    const std::string code_anchor = row.value("code_anchor", "");
    const auto dotpos = code_anchor.find('.');
    if (dotpos == std::string::npos) {
      problems.push_back(id + ": malformed code anchor '" + code_anchor + "'");
    } else {
      const std::string module = code_anchor.substr(0, dotpos);
      const std::string operation = code_anchor.substr(dotpos + 1);
      auto it = headers.find(module);
      if (it == headers.end()) {
        problems.push_back(id + ": dangling code anchor (no module header '" + module + "')");
      } else if (!contains_token(it->second, operation)) {
        problems.push_back(id + ": dangling code anchor (no '" + operation + "' in lsp/" +
                           module + ".hpp)");
      }
    }

    const std::string test_anchor = row.value("test_anchor", "");
    if (test_anchor.empty()) {
      problems.push_back(id + ": missing test anchor");
    } else if (!contains_token(acceptance_text, test_anchor)) {
      problems.push_back(id + ": dangling test anchor '" + test_anchor + "'");
    }
  }

  if (problems.empty()) {
    std::cout << "trace_check: ok (" << table["entries"].size() << " entries)\n";
    return 0;
  }
  for (const auto& p : problems) std::cerr << "trace_check: " << p << "\n";
  return 1;
}
