#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "notemine/io.hpp"

namespace notemine {

// One raw procedure note. Timestamps are carried verbatim and never
// interpreted.
struct ClinicalNote {
  std::string note_id;
  std::string patient_id;
  std::optional<std::string> timestamp;
  std::string raw_text;
};

enum class DropStage { no_impression, emptied };

inline const char* drop_stage_name(DropStage s) {
  return s == DropStage::no_impression ? "no_impression" : "emptied";
}

// Note-count funnel maintained across the ingest/preprocess/negate stages.
struct CorpusStats {
  std::size_t total_notes = 0;
  std::size_t notes_with_impression = 0;
  std::size_t notes_nonempty_after_preprocess = 0;
  std::vector<std::pair<std::string, DropStage>> dropped;

  std::size_t drop_count(DropStage s) const {
    std::size_t n = 0;
    for (const auto& d : dropped)
      if (d.second == s) ++n;
    return n;
  }
};

enum class CorpusFormat { jsonl, csv };

inline CorpusFormat parse_corpus_format(const std::string& s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "csv") return CorpusFormat::csv;
  throw std::runtime_error("unknown corpus format: " + s + " (want jsonl|csv)");
}

namespace detail {

inline ClinicalNote note_from_json(const nlohmann::json& j, std::size_t line) {
  auto fail = [line](const std::string& msg) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + msg);
  };
  if (!j.is_object()) fail("record is not an object");
  if (!j.contains("note_id") || !j["note_id"].is_string())
    fail("missing note_id");
  if (!j.contains("text") || !j["text"].is_string()) fail("missing text");
  ClinicalNote n;
  n.note_id = j["note_id"].get<std::string>();
  n.raw_text = j["text"].get<std::string>();
  if (n.raw_text.empty()) fail("empty text for note " + n.note_id);
  if (j.contains("patient_id") && j["patient_id"].is_string())
    n.patient_id = j["patient_id"].get<std::string>();
  if (j.contains("timestamp") && j["timestamp"].is_string())
    n.timestamp = j["timestamp"].get<std::string>();
  return n;
}

inline std::vector<ClinicalNote> load_jsonl(const fs::path& path) {
  std::vector<ClinicalNote> notes;
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": malformed JSON record");
    notes.push_back(note_from_json(j, lineno));
  }
  return notes;
}

inline std::vector<ClinicalNote> load_csv(const fs::path& path) {
  auto records = parse_csv(read_file(path));
  if (records.empty()) return {};
  const auto& header = records.front().fields;
  int c_id = -1, c_pat = -1, c_ts = -1, c_text = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string h = to_lower(trim(header[i]));
    if (h == "note_id") c_id = static_cast<int>(i);
    else if (h == "patient_id") c_pat = static_cast<int>(i);
    else if (h == "timestamp") c_ts = static_cast<int>(i);
    else if (h == "text") c_text = static_cast<int>(i);
  }
  if (c_id < 0 || c_text < 0)
    throw std::runtime_error("csv header must name note_id and text columns");
  std::vector<ClinicalNote> notes;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    auto field = [&](int c) -> std::string {
      return (c >= 0 && c < static_cast<int>(rec.fields.size()))
                 ? rec.fields[c]
                 : std::string();
    };
    ClinicalNote n;
    n.note_id = field(c_id);
    n.patient_id = field(c_pat);
    n.raw_text = field(c_text);
    std::string ts = field(c_ts);
    if (!ts.empty()) n.timestamp = ts;
    if (n.note_id.empty())
      throw std::runtime_error("line " + std::to_string(rec.line) +
                               ": missing note_id");
    if (n.raw_text.empty())
      throw std::runtime_error("line " + std::to_string(rec.line) +
                               ": empty text for note " + n.note_id);
    notes.push_back(std::move(n));
  }
  return notes;
}

}  // namespace detail

// Loads notes in file order. Duplicate note ids are an error.
inline std::vector<ClinicalNote> load_corpus(const fs::path& path,
                                             CorpusFormat format) {
  std::vector<ClinicalNote> notes = format == CorpusFormat::jsonl
                                        ? detail::load_jsonl(path)
                                        : detail::load_csv(path);
  std::unordered_set<std::string> seen;
  for (const auto& n : notes)
    if (!seen.insert(n.note_id).second)
      throw std::runtime_error("duplicate note_id: " + n.note_id);
  return notes;
}

inline nlohmann::json note_to_json(const ClinicalNote& n) {
  nlohmann::json j;
  j["note_id"] = n.note_id;
  j["patient_id"] = n.patient_id;
  j["timestamp"] = n.timestamp ? nlohmann::json(*n.timestamp)
                               : nlohmann::json(nullptr);
  j["text"] = n.raw_text;
  return j;
}

inline void save_corpus_jsonl(const fs::path& path,
                              const std::vector<ClinicalNote>& notes) {
  std::string out;
  for (const auto& n : notes) {
    out += note_to_json(n).dump();
    out += '\n';
  }
  write_file(path, out);
}

inline std::string funnel_report(const CorpusStats& s) {
  std::ostringstream os;
  os << "notes loaded:                    " << s.total_notes << "\n";
  os << "with an impression section:      " << s.notes_with_impression << "\n";
  os << "non-empty after preprocessing:   "
     << s.notes_nonempty_after_preprocess << "\n";
  os << "dropped per stage:\n";
  os << "  no_impression: " << s.drop_count(DropStage::no_impression) << "\n";
  os << "  emptied:       " << s.drop_count(DropStage::emptied) << "\n";
  return os.str();
}

inline nlohmann::json funnel_to_json(const CorpusStats& s) {
  nlohmann::json drops = nlohmann::json::array();
  for (const auto& d : s.dropped)
    drops.push_back({d.first, drop_stage_name(d.second)});
  return nlohmann::json{
      {"total_notes", s.total_notes},
      {"notes_with_impression", s.notes_with_impression},
      {"notes_nonempty_after_preprocess", s.notes_nonempty_after_preprocess},
      {"dropped", drops}};
}

inline CorpusStats funnel_from_json(const nlohmann::json& j) {
  CorpusStats s;
  s.total_notes = j.at("total_notes").get<std::size_t>();
  s.notes_with_impression = j.at("notes_with_impression").get<std::size_t>();
  s.notes_nonempty_after_preprocess =
      j.at("notes_nonempty_after_preprocess").get<std::size_t>();
  for (const auto& d : j.at("dropped")) {
    std::string stage = d.at(1).get<std::string>();
    s.dropped.emplace_back(d.at(0).get<std::string>(),
                           stage == "no_impression" ? DropStage::no_impression
                                                    : DropStage::emptied);
  }
  return s;
}

}  // namespace notemine
