#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "notemine/coherence.hpp"
#include "notemine/discriminate.hpp"
#include "notemine/io.hpp"
#include "notemine/lda.hpp"
#include "notemine/vectorize.hpp"

namespace notemine {

namespace detail {

inline std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

// Percentages at one decimal that sum to exactly 100.0: largest-remainder
// apportionment in tenths, ties to the lower topic id.
inline std::vector<double> rounded_shares(
    const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return std::vector<double>(counts.size(), 0.0);

  std::vector<long long> tenths(counts.size());
  std::vector<double> frac(counts.size());
  long long assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double exact = 1000.0 * static_cast<double>(counts[i]) /
                   static_cast<double>(total);
    tenths[i] = static_cast<long long>(exact);
    frac[i] = exact - static_cast<double>(tenths[i]);
    assigned += tenths[i];
  }
  long long leftover = 1000 - assigned;
  std::vector<std::size_t> idx(counts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  });
  for (long long i = 0; i < leftover; ++i) ++tenths[idx[i % idx.size()]];

  std::vector<double> shares(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    shares[i] = static_cast<double>(tenths[i]) / 10.0;
  return shares;
}

// ---------------------------------------------------------------------------
// Table 1: theme, share of notes, unique keywords, representative notes

struct Table1Row {
  unsigned topic = 0;
  std::string label;
  double share_pct = 0.0;
  std::vector<std::string> unique_terms;
  std::vector<RepresentativeNote> representatives;
};

inline std::vector<Table1Row> build_table1(
    const TopicModel& model, const std::vector<TopicAssignment>& assignments,
    const Vocabulary& vocab, std::size_t top_n = 10, double threshold = 0.80,
    std::size_t max_reps = 3,
    const std::map<unsigned, std::string>* labels = nullptr) {
  unsigned k_count = model.config.k;
  auto totals = topic_note_totals(assignments, k_count);
  auto shares = rounded_shares(totals);
  auto uniques = unique_keywords(top_keywords(model, top_n));
  auto reps = representative_notes(assignments, k_count, threshold);

  std::vector<Table1Row> rows(k_count);
  for (unsigned k = 0; k < k_count; ++k) {
    rows[k].topic = k;
    if (labels) {
      auto it = labels->find(k);
      if (it != labels->end()) rows[k].label = it->second;
    }
    rows[k].share_pct = shares[k];
    for (auto id : uniques[k]) rows[k].unique_terms.push_back(vocab.terms[id]);
    auto& list = reps[k];
    if (list.size() > max_reps) list.resize(max_reps);
    rows[k].representatives = std::move(list);
  }
  return rows;
}

inline std::string table1_markdown(
    const std::vector<Table1Row>& rows,
    const std::map<std::string, std::string>* note_texts = nullptr) {
  std::string out =
      "| Topic | Theme | % of notes | Unique keywords (top 10) | "
      "Representative notes |\n|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += "| " + std::to_string(r.topic + 1) + " | ";
    out += r.label.empty() ? "-" : r.label;
    out += " | " + detail::fixed1(r.share_pct) + " | ";
    out += r.unique_terms.empty() ? "-" : join(r.unique_terms, ", ");
    out += " | ";
    if (r.representatives.empty()) {
      out += "-";
    } else {
      std::vector<std::string> cells;
      for (const auto& rep : r.representatives) {
        std::string cell = rep.note_id + " (" +
                           detail::fixed2(rep.contribution) + ")";
        if (note_texts) {
          auto it = note_texts->find(rep.note_id);
          if (it != note_texts->end()) {
            std::string text = it->second;
            for (auto& c : text)
              if (c == '\n' || c == '|') c = ' ';
            if (text.size() > 120) text = text.substr(0, 117) + "...";
            cell += ": \"" + text + "\"";
          }
        }
        cells.push_back(std::move(cell));
      }
      out += join(cells, "; ");
    }
    out += " |\n";
  }
  out += "\nNotes with a dominant-topic contribution of 0.80 or higher "
         "qualify as representative.\n";
  return out;
}

inline std::string table1_csv(const std::vector<Table1Row>& rows) {
  std::string out = "topic,theme,share_pct,unique_keywords,representatives\n";
  for (const auto& r : rows) {
    std::vector<std::string> reps;
    for (const auto& rep : r.representatives)
      reps.push_back(rep.note_id + ":" + detail::fixed2(rep.contribution));
    out += std::to_string(r.topic + 1);
    out += ',';
    out += csv_escape(r.label);
    out += ',';
    out += detail::fixed1(r.share_pct);
    out += ',';
    out += csv_escape(join(r.unique_terms, " "));
    out += ',';
    out += csv_escape(join(reps, " "));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Table 2: discriminative words

inline std::string table2_markdown(const FeatureRanking& ranking) {
  std::string out = "| Word | p-value |";
  for (unsigned k = 0; k < ranking.k_count; ++k)
    out += " Topic " + std::to_string(k + 1) + " |";
  out += "\n|---|---|";
  for (unsigned k = 0; k < ranking.k_count; ++k) out += "---|";
  out += '\n';
  for (const auto& row : ranking.rows) {
    out += "| " + row.term + " (\xCF\x87\xC2\xB2(" + std::to_string(row.dof) +
           ") = " + detail::fixed1(row.chi2) + ") | ";
    char pbuf[32];
    std::snprintf(pbuf, sizeof pbuf, "%.3g", row.p_value);
    out += pbuf;
    out += " |";
    std::uint64_t maxv = 0;
    for (auto c : row.present) maxv = std::max(maxv, c);
    for (auto c : row.present) {
      if (c == maxv)
        out += " **" + std::to_string(c) + "** |";
      else
        out += " " + std::to_string(c) + " |";
    }
    out += '\n';
  }
  out += "\nCounts are notes containing the word, by dominant topic; the "
         "per-row maximum is bold. All words are significant at the " +
         format_double(ranking.alpha_level) + " significance level.\n";
  return out;
}

inline std::string table2_csv(const FeatureRanking& ranking) {
  std::string out = "term,chi2,dof,p_value";
  for (unsigned k = 0; k < ranking.k_count; ++k)
    out += ",topic_" + std::to_string(k + 1);
  out += ",max_topic\n";
  for (const auto& row : ranking.rows) {
    out += csv_escape(row.term);
    out += ',';
    out += format_double(row.chi2);
    out += ',';
    out += std::to_string(row.dof);
    out += ',';
    out += format_double(row.p_value);
    std::size_t max_k = 0;
    for (std::size_t k = 0; k < row.present.size(); ++k)
      if (row.present[k] > row.present[max_k]) max_k = k;
    for (auto c : row.present) {
      out += ',';
      out += std::to_string(c);
    }
    out += ',';
    out += std::to_string(max_k + 1);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coherence plot

inline std::string coherence_svg(const SweepResult& sweep) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : sweep.records)
    if (!r.failed) pts.emplace_back(static_cast<double>(r.k), r.coherence);

  const double width = 640, height = 400;
  const double ml = 70, mr = 20, mt = 30, mb = 50;
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
      "height=\"400\" viewBox=\"0 0 640 400\">\n"
      "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  if (pts.size() >= 1) {
    double xmin = pts.front().first, xmax = pts.back().first;
    double ymin = pts[0].second, ymax = pts[0].second;
    for (const auto& [_, y] : pts) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto sx = [&](double x) {
      return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
    };
    auto sy = [&](double y) {
      return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };
    std::string poly;
    for (const auto& [x, y] : pts) {
      if (!poly.empty()) poly += ' ';
      poly += detail::fixed2(sx(x)) + "," + detail::fixed2(sy(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" "
           "points=\"" + poly + "\"/>\n";
    for (const auto& [x, y] : pts) {
      std::string cx = detail::fixed2(sx(x)), cy = detail::fixed2(sy(y));
      bool selected = static_cast<unsigned>(x) == sweep.selected_k;
      svg += "<circle cx=\"" + cx + "\" cy=\"" + cy + "\" r=\"" +
             (selected ? "5" : "3") + "\" fill=\"" +
             (selected ? "red" : "black") + "\"/>\n";
      svg += "<text x=\"" + cx + "\" y=\"" +
             detail::fixed2(height - mb + 18) +
             "\" font-size=\"12\" text-anchor=\"middle\">" +
             std::to_string(static_cast<unsigned>(x)) + "</text>\n";
    }
    svg += "<text x=\"" + detail::fixed2(ml) + "\" y=\"" +
           detail::fixed2(sy(ymax)) + "\" font-size=\"11\" "
           "text-anchor=\"end\">" + detail::fixed2(ymax) + "</text>\n";
    svg += "<text x=\"" + detail::fixed2(ml) + "\" y=\"" +
           detail::fixed2(sy(ymin)) + "\" font-size=\"11\" "
           "text-anchor=\"end\">" + detail::fixed2(ymin) + "</text>\n";
  }
  svg += "<text x=\"320\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
         "coherence (" + std::string(coherence_measure_name(sweep.measure)) +
         ") vs number of topics</text>\n";
  svg += "<text x=\"320\" y=\"390\" font-size=\"12\" "
         "text-anchor=\"middle\">k</text>\n</svg>\n";
  return svg;
}

// labels file: "<topic index><TAB>label", one per line, '#' comments
inline std::map<unsigned, std::string> load_topic_labels(const fs::path& path) {
  std::map<unsigned, std::string> labels;
  std::size_t lineno = 0;
  for (const auto& raw : read_lines(path)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) +
                               ": expected <topic>\\t<label>");
    labels[static_cast<unsigned>(std::stoul(line.substr(0, tab)))] =
        trim(line.substr(tab + 1));
  }
  return labels;
}

}  // namespace notemine
