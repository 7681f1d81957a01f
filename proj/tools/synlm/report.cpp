#include "synlm/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "synlm/errors.hpp"
#include "synlm/psych/records.hpp"

namespace synlm::cli {

namespace {

using nlohmann::json;

constexpr const char* kPalette[] = {"#3b6ea8", "#d07c2e", "#5a9e55", "#a8444b", "#7d62a6", "#8c6d4f"};

double get(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nan("");
  return j[key].get<double>();
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string f2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

void effect_row(std::ostringstream& tsv, const std::string& suite, const std::string& model, const std::string& name,
                const json& e, const char* p_key) {
  tsv << "effect\t" << suite << "\t" << model << "\t" << name << "\t-\t" << psych::format_number(get(e, "mean"))
      << "\t" << psych::format_number(get(e, "ci_low")) << "\t" << psych::format_number(get(e, "ci_high")) << "\t"
      << psych::format_number(get(e, p_key)) << "\n";
}

struct Frame {
  double width, height, left = 70, right = 20, top = 40, bottom = 80;
  double lo = 0.0, hi = 1.0;
  double y(double v) const { return top + (hi - v) / (hi - lo) * (height - top - bottom); }
};

std::ostringstream& open_svg(std::ostringstream& svg, const Frame& f, const std::string& title,
                             const json& provenance) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<!-- provenance " << esc(provenance.dump()) << " -->\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title)
      << "</text>\n";
  return svg;
}

void axis(std::ostringstream& svg, const Frame& f, const std::string& label) {
  const double x0 = f.left, x1 = f.width - f.right;
  svg << "<line x1=\"" << x0 << "\" y1=\"" << f.top << "\" x2=\"" << x0 << "\" y2=\"" << f.y(f.lo)
      << "\" stroke=\"black\"/>\n";
  const double zero = std::clamp(0.0, f.lo, f.hi);
  svg << "<line x1=\"" << x0 << "\" y1=\"" << f.y(zero) << "\" x2=\"" << x1 << "\" y2=\"" << f.y(zero)
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = f.lo + (f.hi - f.lo) * k / 5.0;
    svg << "<line x1=\"" << x0 - 4 << "\" y1=\"" << f.y(v) << "\" x2=\"" << x0 << "\" y2=\"" << f.y(v)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << f.y(v) + 4 << "\" text-anchor=\"end\">" << f2(v) << "</text>\n";
  }
  svg << "<text transform=\"translate(16," << (f.top + f.y(f.lo)) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << esc(label) << "</text>\n";
}

void bar(std::ostringstream& svg, const Frame& f, double x, double w, const BarDatum& d, const char* colour,
         const std::string& key) {
  const double base = f.y(std::clamp(0.0, f.lo, f.hi));
  const double top = f.y(d.mean);
  svg << "<rect x=\"" << x << "\" y=\"" << std::min(base, top) << "\" width=\"" << w << "\" height=\""
      << std::abs(base - top) << "\" fill=\"" << colour << "\"><title>" << esc(key) << ": " << f2(d.mean);
  if (std::isfinite(d.low)) svg << " [" << f2(d.low) << ", " << f2(d.high) << "]";
  svg << "</title></rect>\n";
  if (std::isfinite(d.low) && std::isfinite(d.high)) {
    const double cx = x + w / 2;
    svg << "<line x1=\"" << cx << "\" y1=\"" << f.y(d.low) << "\" x2=\"" << cx << "\" y2=\"" << f.y(d.high)
        << "\" stroke=\"black\"/>\n";
    for (double v : {d.low, d.high}) {
      svg << "<line x1=\"" << cx - 4 << "\" y1=\"" << f.y(v) << "\" x2=\"" << cx + 4 << "\" y2=\"" << f.y(v)
          << "\" stroke=\"black\"/>\n";
    }
  }
}

void legend(std::ostringstream& svg, const Frame& f, const std::vector<std::string>& models) {
  double x = f.left;
  const double y = f.height - 18;
  for (std::size_t m = 0; m < models.size(); ++m) {
    svg << "<rect x=\"" << x << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[m % 6]
        << "\"/>\n";
    svg << "<text x=\"" << x + 16 << "\" y=\"" << y << "\">" << esc(models[m]) << "</text>\n";
    x += 28 + 7.0 * static_cast<double>(models[m].size());
  }
}

std::pair<double, double> range_of(const std::vector<BarDatum>& bars) {
  double lo = 0.0, hi = 0.0;
  for (const auto& b : bars) {
    for (double v : {b.mean, b.low, b.high}) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const double pad = 0.08 * (hi - lo);
  return {lo < 0 ? lo - pad : lo, hi + pad};
}

}  // namespace

ReportTables build_report(const std::vector<json>& summaries) {
  if (summaries.empty()) throw Error(ErrorKind::kData, "report needs at least one analysis result");
  ReportTables t;
  t.suite = summaries.front().at("suite").get<std::string>();
  for (const auto& c : summaries.front().at("conditions")) {
    t.conditions.push_back(c.at("name").get<std::string>());
    t.grammatical.push_back(c.at("grammatical").get<bool>());
  }
  std::ostringstream tsv;
  tsv << "kind\tsuite\tmodel\tlabel\tgrammatical\testimate\tci_low\tci_high\tp\n";
  for (const auto& s : summaries) {
    const std::string model = s.at("model").get<std::string>();
    if (std::find(t.models.begin(), t.models.end(), model) != t.models.end()) {
      throw Error(ErrorKind::kData, "suite '" + t.suite + "' has two results for model '" + model + "'");
    }
    t.models.push_back(model);
    for (std::size_t c = 0; c < t.conditions.size(); ++c) {
      const json* cond = nullptr;
      for (const auto& jc : s.at("conditions")) {
        if (jc.at("name") == t.conditions[c]) cond = &jc;
      }
      if (cond == nullptr) throw Error(ErrorKind::kData, "result for '" + model + "' lacks condition " + t.conditions[c]);
      const BarDatum d{model, t.conditions[c], t.grammatical[c], get(*cond, "mean"), get(*cond, "ci_low"),
                       get(*cond, "ci_high")};
      t.bars.push_back(d);
      tsv << "condition\t" << t.suite << "\t" << model << "\t" << d.label << "\t" << (d.grammatical ? "yes" : "no")
          << "\t" << psych::format_number(d.mean) << "\t" << psych::format_number(d.low) << "\t"
          << psych::format_number(d.high) << "\t-\n";
    }
    for (const char* key : {"interaction", "licensor_effect", "distractor_effect", "contrast"}) {
      if (s.contains(key)) effect_row(tsv, t.suite, model, key, s[key], "p_permutation");
    }
    if (s.contains("accuracy")) {
      const auto& a = s["accuracy"];
      const BarDatum d{model, "accuracy", true, get(a, "accuracy"), get(a, "ci_low"), get(a, "ci_high")};
      t.accuracy.push_back(d);
      tsv << "accuracy\t" << t.suite << "\t" << model << "\taccuracy\t-\t" << psych::format_number(d.mean) << "\t"
          << psych::format_number(d.low) << "\t" << psych::format_number(d.high) << "\t"
          << psych::format_number(get(a, "p_binomial")) << "\n";
    }
  }
  t.tsv = tsv.str();
  return t;
}

std::string render_condition_chart(const std::string& title, const ReportTables& t, const json& provenance) {
  const double bar_w = 22, gap = 40;
  const double group_w = bar_w * static_cast<double>(t.models.size()) + gap;
  Frame f{0, 380};
  f.width = f.left + f.right + group_w * static_cast<double>(t.conditions.size()) + 20;
  f.width = std::max(f.width, 320.0);
  std::tie(f.lo, f.hi) = range_of(t.bars);

  std::ostringstream svg;
  open_svg(svg, f, title, provenance);
  axis(svg, f, "summed surprisal (bits)");
  for (std::size_t c = 0; c < t.conditions.size(); ++c) {
    const double gx = f.left + 20 + group_w * static_cast<double>(c);
    for (std::size_t m = 0; m < t.models.size(); ++m) {
      const BarDatum& d = t.bars[m * t.conditions.size() + c];
      bar(svg, f, gx + bar_w * static_cast<double>(m), bar_w - 2, d, kPalette[m % 6],
          t.suite + " / " + d.model + " / " + d.label);
    }
    const std::string label = (t.grammatical[c] ? "" : "*") + t.conditions[c];
    svg << "<text x=\"" << gx + (group_w - gap) / 2 << "\" y=\"" << f.y(f.lo) + 18
        << "\" text-anchor=\"middle\">" << esc(label) << "</text>\n";
  }
  svg << "<text x=\"" << f.left << "\" y=\"" << f.height - 40
      << "\" font-size=\"10\">* ungrammatical; whiskers: 95% within-item CI</text>\n";
  legend(svg, f, t.models);
  svg << "</svg>\n";
  return svg.str();
}

std::string render_accuracy_chart(const std::string& title, const ReportTables& t, const json& provenance) {
  const double bar_w = 40;
  Frame f{0, 340};
  f.width = std::max(320.0, f.left + f.right + 60 * static_cast<double>(t.accuracy.size()) + 40);
  f.lo = 0.0;
  f.hi = 1.0;
  std::ostringstream svg;
  open_svg(svg, f, title + ": accuracy", provenance);
  axis(svg, f, "accuracy");
  svg << "<line x1=\"" << f.left << "\" y1=\"" << f.y(0.5) << "\" x2=\"" << f.width - f.right << "\" y2=\""
      << f.y(0.5) << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t m = 0; m < t.accuracy.size(); ++m) {
    const double x = f.left + 30 + 60 * static_cast<double>(m);
    bar(svg, f, x, bar_w, t.accuracy[m], kPalette[m % 6], t.suite + " / " + t.accuracy[m].model + " / accuracy");
  }
  svg << "<text x=\"" << f.left << "\" y=\"" << f.height - 40
      << "\" font-size=\"10\">whiskers: 95% binomial CI; dashed: chance</text>\n";
  legend(svg, f, t.models);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace synlm::cli
