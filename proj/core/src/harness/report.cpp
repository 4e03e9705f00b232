#include "elicit/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "elicit/annotators.hpp"
#include "elicit/error.hpp"
#include "elicit/harness/sweep.hpp"
#include "elicit/text.hpp"

namespace elicit::harness {

namespace fs = std::filesystem;
using text::format_double;
using text::format_fixed;

void check_ledger(std::span<const ResultRow> rows, const CostModel& costs) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const Currency expected = label_cost(r.n_weak, r.n_hq, costs);
    if (r.cost != expected) {
      throw ValidationError("ledger", "row " + std::to_string(i + 1) + " (" + r.method + ", B=" +
                                          r.budget.to_string() + ", rho=" + format_double(r.rho) +
                                          ", seed " + std::to_string(r.seed) + ") bills " +
                                          r.cost.to_string() + " but its labels cost " +
                                          expected.to_string());
    }
  }
}

std::vector<CellStats> cells_of(std::span<const ResultRow> rows, std::size_t cost_model) {
  std::vector<RunResult> runs;
  runs.reserve(rows.size());
  for (const auto& r : rows) runs.push_back(r.to_run());
  return aggregate(runs, cost_model);
}

namespace {

std::string pct(double acc) { return format_fixed(100.0 * acc, 1); }

// Code points, so the "±" column lines up.
std::size_t display_width(const std::string& s) {
  std::size_t len = 0;
  for (unsigned char c : s) len += (c & 0xC0) != 0x80;
  return len;
}

std::string pad(std::string s, std::size_t width) {
  const std::size_t len = display_width(s);
  if (len < width) s.append(width - len, ' ');
  return s;
}

std::string entry_text(const std::optional<CellStats>& cell) {
  if (!cell) return "-";
  return pct(cell->accuracy.mean) + " ± " + pct(cell->accuracy.std) + " (" +
         format_fixed(cell->key.rho, 2) + ")";
}

}  // namespace

std::string budget_table_text(std::span<const CellStats> cells,
                              std::span<const std::string> methods,
                              std::span<const Currency> budgets) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"budget"};
  header.insert(header.end(), methods.begin(), methods.end());
  grid.push_back(header);
  for (const auto& b : budgets) {
    std::vector<std::string> line{b.to_string()};
    for (const auto& m : methods) line.push_back(entry_text(best_under_budget(cells, m, b)));
    grid.push_back(line);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      width[c] = std::max(width[c], display_width(line[c]));
    }
  }
  std::string out;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (c > 0) out += "  ";
      out += pad(grid[r][c], width[c]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + '\n';
    }
  }
  return out;
}

std::string budget_table_csv(std::span<const CellStats> cells, std::span<const std::string> methods,
                             std::span<const Currency> budgets, std::size_t cost_model) {
  std::string out = "cost_model,budget,method,mean_acc,std_acc,n_seeds,rho,cell_budget,mean_cost\n";
  for (const auto& b : budgets) {
    for (const auto& m : methods) {
      const auto best = best_under_budget(cells, m, b);
      if (!best) continue;
      out += text::join_csv({std::to_string(cost_model), b.to_string(), m,
                             format_double(best->accuracy.mean), format_double(best->accuracy.std),
                             std::to_string(best->accuracy.n), format_double(best->key.rho),
                             Currency::from_micros(best->key.budget_micros).to_string(),
                             format_double(best->mean_cost)});
      out += '\n';
    }
  }
  return out;
}

namespace {

const CellStats* find_cell(std::span<const CellStats> cells, const ParetoPoint& p) {
  for (const auto& c : cells) {
    if (c.key.method == p.provenance.method && c.key.rho == p.provenance.rho &&
        c.key.budget_micros == p.provenance.budget.micros()) {
      return &c;
    }
  }
  return nullptr;
}

}  // namespace

std::string frontier_csv(std::span<const CellStats> cells, std::size_t cost_model) {
  std::string out = "cost_model,cost,accuracy,std,method,rho,budget,weak_fraction\n";
  for (const auto& p : frontier_of(cells)) {
    const CellStats* c = find_cell(cells, p);
    out += text::join_csv({std::to_string(cost_model), format_double(p.cost),
                           format_double(p.accuracy), format_double(c ? c->accuracy.std : 0.0),
                           p.provenance.method, format_double(p.provenance.rho),
                           p.provenance.budget.to_string(),
                           format_double(c ? c->count_fraction() : 0.0)});
    out += '\n';
  }
  return out;
}

std::vector<RegimeEntry> regime_map(std::span<const CellStats> cells) {
  std::map<std::pair<std::string, std::int64_t>, std::vector<CurvePoint>> curves;
  for (const auto& c : cells) {
    curves[{c.key.method, c.key.budget_micros}].push_back(
        CurvePoint{c.key.rho, c.accuracy.mean, c.accuracy.std, c.accuracy.n});
  }
  std::vector<RegimeEntry> out;
  for (auto& [key, curve] : curves) {
    const bool has0 = std::any_of(curve.begin(), curve.end(), [](auto& p) { return p.rho == 0.0; });
    const bool has1 = std::any_of(curve.begin(), curve.end(), [](auto& p) { return p.rho == 1.0; });
    if (!has0 || !has1) continue;
    std::sort(curve.begin(), curve.end(), [](auto& a, auto& b) { return a.rho < b.rho; });
    out.push_back(RegimeEntry{key.first,
                              classify_regime(curve, Currency::from_micros(key.second))});
  }
  return out;
}

std::string regimes_csv(std::span<const RegimeEntry> regimes, std::size_t cost_model) {
  std::string out = "cost_model,method,budget,regime,optimal_rho\n";
  for (const auto& r : regimes) {
    out += text::join_csv({std::to_string(cost_model), r.method, r.regime.budget.to_string(),
                           std::string(to_string(r.regime.kind)),
                           format_double(r.regime.optimal_rho)});
    out += '\n';
  }
  return out;
}

std::string regimes_text(std::span<const RegimeEntry> regimes) {
  std::string out;
  std::string current;
  for (const auto& r : regimes) {
    if (r.method != current) {
      current = r.method;
      out += current + "\n";
    }
    out += "  B=" + pad(r.regime.budget.to_string(), 8) + pad(std::string(to_string(r.regime.kind)), 19) +
           "rho*=" + format_fixed(r.regime.optimal_rho, 2) + "\n";
  }
  return out;
}

namespace {

// Minimal SVG assembly; coordinates are rounded so output is stable.
class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void comment(const std::string& body) { head_ += "<!--\n" + body + "-->\n"; }
  void add(const std::string& element) { body_ += "  " + element + "\n"; }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" + head_ +
           "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
           num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
           "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
  }

  static std::string num(double v) { return format_fixed(v, 2); }

 private:
  double width_;
  double height_;
  std::string head_;
  std::string body_;
};

std::string escape(const std::string& s) {
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

std::string text_el(double x, double y, const std::string& s, const std::string& extra = "") {
  return "<text x=\"" + Svg::num(x) + "\" y=\"" + Svg::num(y) + "\"" +
         (extra.empty() ? "" : " " + extra) + ">" + escape(s) + "</text>";
}

std::string line_el(double x1, double y1, double x2, double y2, const std::string& style) {
  return "<line x1=\"" + Svg::num(x1) + "\" y1=\"" + Svg::num(y1) + "\" x2=\"" + Svg::num(x2) +
         "\" y2=\"" + Svg::num(y2) + "\" " + style + "/>";
}

// Blue for all high-quality labels, orange for all weak labels.
std::string fraction_color(double f) {
  f = std::clamp(f, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(49 + f * (230 - 49)));
  const int g = static_cast<int>(std::lround(104 + f * (120 - 104)));
  const int b = static_cast<int>(std::lround(189 + f * (30 - 189)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string marker(std::size_t shape, double x, double y, const std::string& fill) {
  const std::string style = "fill=\"" + fill + "\" stroke=\"#333333\" stroke-width=\"0.8\"";
  const double s = 5.0;
  auto pts = [](std::initializer_list<std::pair<double, double>> p) {
    std::string out;
    for (const auto& [px, py] : p) {
      if (!out.empty()) out += ' ';
      out += Svg::num(px) + "," + Svg::num(py);
    }
    return out;
  };
  switch (shape % 4) {
    case 0:
      return "<circle cx=\"" + Svg::num(x) + "\" cy=\"" + Svg::num(y) + "\" r=\"" + Svg::num(s) +
             "\" " + style + "/>";
    case 1:
      return "<rect x=\"" + Svg::num(x - s) + "\" y=\"" + Svg::num(y - s) + "\" width=\"" +
             Svg::num(2 * s) + "\" height=\"" + Svg::num(2 * s) + "\" " + style + "/>";
    case 2:
      return "<polygon points=\"" + pts({{x, y - s - 1}, {x + s + 1, y + s}, {x - s - 1, y + s}}) +
             "\" " + style + "/>";
    default:
      return "<polygon points=\"" + pts({{x, y - s - 1}, {x + s + 1, y}, {x, y + s + 1}, {x - s - 1, y}}) +
             "\" " + style + "/>";
  }
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range accuracy_range(std::span<const CellStats> cells) {
  double lo = 1.0, hi = 0.0;
  for (const auto& c : cells) {
    lo = std::min(lo, c.accuracy.mean - c.accuracy.std);
    hi = std::max(hi, c.accuracy.mean + c.accuracy.std);
  }
  Range r{std::floor(lo * 20.0) / 20.0, std::ceil(hi * 20.0) / 20.0};
  r.lo = std::max(0.0, r.lo);
  r.hi = std::min(1.0, r.hi);
  if (r.hi - r.lo < 0.05) r.hi = std::min(1.0, r.lo + 0.05);
  if (r.hi - r.lo < 0.05) r.lo = r.hi - 0.05;
  return r;
}

std::vector<std::string> method_order(std::span<const CellStats> cells) {
  std::vector<std::string> out;
  for (const auto& c : cells) {
    if (std::find(out.begin(), out.end(), c.key.method) == out.end()) out.push_back(c.key.method);
  }
  return out;
}

}  // namespace

std::string frontier_svg(std::span<const CellStats> cells, const std::string& title) {
  const double W = 760, H = 480, left = 70, right = 220, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  Svg svg(W, H);

  const auto frontier = frontier_of(cells);
  const auto methods = method_order(cells);
  auto on_frontier = [&](const CellStats& c) {
    return std::any_of(frontier.begin(), frontier.end(), [&](const ParetoPoint& p) {
      return find_cell(cells, p) == &c;
    });
  };

  std::string data = "data\ncost,accuracy,std,method,rho,budget,weak_fraction,on_frontier\n";
  for (const auto& c : cells) {
    data += text::join_csv({format_double(c.mean_cost), format_double(c.accuracy.mean),
                            format_double(c.accuracy.std), c.key.method, format_double(c.key.rho),
                            Currency::from_micros(c.key.budget_micros).to_string(),
                            format_double(c.count_fraction()), on_frontier(c) ? "1" : "0"});
    data += '\n';
  }
  svg.comment(data);

  double xmax = 1.0;
  for (const auto& c : cells) xmax = std::max(xmax, std::log10(c.mean_cost + 1.0));
  xmax = std::ceil(xmax * 2.0) / 2.0;
  const Range yr = accuracy_range(cells);
  auto px = [&](double cost) { return left + pw * std::log10(cost + 1.0) / xmax; };
  auto py = [&](double acc) { return top + ph * (1.0 - (acc - yr.lo) / (yr.hi - yr.lo)); };

  svg.add(text_el(left, 24, title, "font-size=\"15\""));
  svg.add(line_el(left, top + ph, left + pw, top + ph, "stroke=\"black\""));
  svg.add(line_el(left, top, left, top + ph, "stroke=\"black\""));
  for (double t = 1.0; std::log10(t + 1.0) <= xmax + 1e-9; t *= 10.0) {
    const double x = px(t);
    svg.add(line_el(x, top + ph, x, top + ph + 5, "stroke=\"black\""));
    svg.add(text_el(x, top + ph + 18, format_double(t), "text-anchor=\"middle\""));
  }
  for (double a = yr.lo; a <= yr.hi + 1e-9; a += 0.05) {
    const double y = py(a);
    svg.add(line_el(left - 5, y, left, y, "stroke=\"black\""));
    svg.add(line_el(left, y, left + pw, y, "stroke=\"#e0e0e0\""));
    svg.add(text_el(left - 8, y + 4, format_fixed(a, 2), "text-anchor=\"end\""));
  }
  svg.add(text_el(left + pw / 2, H - 18, "mean label cost (log scale)", "text-anchor=\"middle\""));
  svg.add(text_el(18, top + ph / 2, "test accuracy",
                  "text-anchor=\"middle\" transform=\"rotate(-90 18 " + Svg::num(top + ph / 2) + ")\""));

  if (!frontier.empty()) {
    std::string path = "M " + Svg::num(px(frontier.front().cost)) + " " +
                       Svg::num(py(frontier.front().accuracy));
    for (std::size_t i = 1; i < frontier.size(); ++i) {
      path += " H " + Svg::num(px(frontier[i].cost)) + " V " + Svg::num(py(frontier[i].accuracy));
    }
    svg.add("<path class=\"frontier\" d=\"" + path +
            "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>");
  }
  for (const auto& c : cells) {
    const std::size_t shape =
        static_cast<std::size_t>(std::find(methods.begin(), methods.end(), c.key.method) - methods.begin());
    svg.add(marker(shape, px(c.mean_cost), py(c.accuracy.mean), fraction_color(c.count_fraction())));
  }

  // Legend: methods present on the frontier, then the weak-fraction color scale.
  const double lx = left + pw + 24;
  double ly = top + 10;
  svg.add(text_el(lx, ly, "frontier methods", "font-weight=\"bold\""));
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const bool present = std::any_of(frontier.begin(), frontier.end(), [&](const ParetoPoint& p) {
      return p.provenance.method == methods[m];
    });
    if (!present) continue;
    ly += 20;
    svg.add(marker(m, lx + 6, ly - 4, "#bbbbbb"));
    svg.add(text_el(lx + 18, ly, methods[m], "class=\"legend-entry\""));
  }
  ly += 34;
  svg.add(text_el(lx, ly, "weak-label fraction", "font-weight=\"bold\""));
  for (int i = 0; i <= 10; ++i) {
    svg.add("<rect x=\"" + Svg::num(lx + 14.0 * i) + "\" y=\"" + Svg::num(ly + 8) +
            "\" width=\"14.00\" height=\"12.00\" fill=\"" + fraction_color(i / 10.0) + "\"/>");
  }
  svg.add(text_el(lx, ly + 34, "0"));
  svg.add(text_el(lx + 154, ly + 34, "1", "text-anchor=\"end\""));
  return svg.str();
}

std::vector<std::string> svg_legend_methods(const std::string& svg) {
  static const std::regex entry("class=\"legend-entry\">([^<]*)</text>");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), entry); it != std::sregex_iterator();
       ++it) {
    std::string name = (*it)[1].str();
    for (const auto& [from, to] : {std::pair{"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""},
                                   {"&amp;", "&"}}) {
      for (std::size_t pos; (pos = name.find(from)) != std::string::npos;) {
        name.replace(pos, std::string_view(from).size(), to);
      }
    }
    out.push_back(name);
  }
  return out;
}

std::string curves_svg(std::span<const CellStats> cells, const std::string& method,
                       const std::string& title) {
  std::map<std::int64_t, std::vector<const CellStats*>> by_budget;
  std::vector<CellStats> mine;
  for (const auto& c : cells) {
    if (c.key.method == method) {
      by_budget[c.key.budget_micros].push_back(&c);
      mine.push_back(c);
    }
  }
  const std::size_t panels = std::max<std::size_t>(1, by_budget.size());
  const std::size_t cols = std::min<std::size_t>(3, panels);
  const std::size_t rows = (panels + cols - 1) / cols;
  const double pw = 200, ph = 150, gap_x = 70, gap_y = 70, left = 60, top = 50;
  const double W = left + cols * (pw + gap_x), H = top + rows * (ph + gap_y);
  Svg svg(W, H);

  std::string data = "data\nbudget,rho,n_weak,n_hq,mean_acc,std_acc,n_seeds\n";
  for (const auto& [b, list] : by_budget) {
    for (const auto* c : list) {
      data += text::join_csv({Currency::from_micros(b).to_string(), format_double(c->key.rho),
                              format_double(c->mean_n_weak), format_double(c->mean_n_hq),
                              format_double(c->accuracy.mean), format_double(c->accuracy.std),
                              std::to_string(c->accuracy.n)});
      data += '\n';
    }
  }
  svg.comment(data);
  svg.add(text_el(left, 26, title, "font-size=\"15\""));

  const Range yr = accuracy_range(mine);
  std::size_t idx = 0;
  for (auto& [b, list] : by_budget) {
    std::sort(list.begin(), list.end(),
              [](const CellStats* a, const CellStats* c) { return a->key.rho < c->key.rho; });
    const double ox = left + (idx % cols) * (pw + gap_x);
    const double oy = top + (idx / cols) * (ph + gap_y);
    ++idx;
    double xmax = 1.0;
    for (const auto* c : list) xmax = std::max(xmax, c->mean_n_weak);
    auto px = [&](double n) { return ox + pw * n / xmax; };
    auto py = [&](double a) { return oy + ph * (1.0 - (a - yr.lo) / (yr.hi - yr.lo)); };

    svg.add(text_el(ox + pw / 2, oy - 8, "budget " + Currency::from_micros(b).to_string(),
                    "text-anchor=\"middle\""));
    svg.add(line_el(ox, oy + ph, ox + pw, oy + ph, "stroke=\"black\""));
    svg.add(line_el(ox, oy, ox, oy + ph, "stroke=\"black\""));
    for (double a = yr.lo; a <= yr.hi + 1e-9; a += 0.05) {
      svg.add(line_el(ox - 4, py(a), ox, py(a), "stroke=\"black\""));
      svg.add(text_el(ox - 6, py(a) + 4, format_fixed(a, 2), "text-anchor=\"end\" font-size=\"10\""));
    }
    for (int t = 0; t <= 2; ++t) {
      const double n = xmax * t / 2.0;
      svg.add(line_el(px(n), oy + ph, px(n), oy + ph + 4, "stroke=\"black\""));
      svg.add(text_el(px(n), oy + ph + 16, format_fixed(n, 0), "text-anchor=\"middle\" font-size=\"10\""));
    }
    svg.add(text_el(ox + pw / 2, oy + ph + 32, "weak labels used", "text-anchor=\"middle\" font-size=\"11\""));

    std::string points;
    for (const auto* c : list) {
      if (!points.empty()) points += ' ';
      points += Svg::num(px(c->mean_n_weak)) + "," + Svg::num(py(c->accuracy.mean));
      svg.add(line_el(px(c->mean_n_weak), py(c->accuracy.mean - c->accuracy.std),
                      px(c->mean_n_weak), py(c->accuracy.mean + c->accuracy.std),
                      "stroke=\"#888888\""));
    }
    svg.add("<polyline points=\"" + points + "\" fill=\"none\" stroke=\"#3168bd\" stroke-width=\"1.5\"/>");
    for (const auto* c : list) {
      svg.add(marker(0, px(c->mean_n_weak), py(c->accuracy.mean), fraction_color(c->count_fraction())));
    }
  }
  return svg.str();
}

namespace {

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      out += c;
    } else if (c == '=' || c == '.') {
      out += '-';
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

}  // namespace

std::vector<std::string> write_report(const ExperimentConfig& config, const fs::path& dir) {
  const auto results = load_results(config, dir);
  std::size_t total = 0;
  for (const auto& rows : results) total += rows.size();
  if (total == 0) throw ValidationError("results", "store in " + dir.string() + " has no rows");
  for (std::size_t cm = 0; cm < results.size(); ++cm) {
    check_ledger(results[cm], config.grid.cost_models[cm]);
  }

  std::vector<std::string> methods;
  for (const auto& m : config.methods) methods.push_back(m.name());

  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    write_file_atomic(dir / name, contents);
    written.push_back(name);
  };

  std::string summary;
  for (std::size_t cm = 0; cm < results.size(); ++cm) {
    if (results[cm].empty()) continue;
    const auto cells = cells_of(results[cm], cm);
    const auto& costs = config.grid.cost_models[cm];
    const std::string tag = "cm" + std::to_string(cm);
    const std::string label = "weak cost " + costs.weak_cost.to_string() + ", high-quality cost " +
                              costs.hq_cost.to_string();

    const std::string table = budget_table_text(cells, methods, config.grid.budgets);
    const auto regimes = regime_map(cells);
    emit("table_" + tag + ".txt", table);
    emit("table_" + tag + ".csv", budget_table_csv(cells, methods, config.grid.budgets, cm));
    emit("frontier_" + tag + ".csv", frontier_csv(cells, cm));
    emit("regimes_" + tag + ".csv", regimes_csv(regimes, cm));
    emit("frontier_" + tag + ".svg", frontier_svg(cells, "Accuracy vs cost (" + label + ")"));
    for (const auto& m : methods) {
      if (std::none_of(cells.begin(), cells.end(), [&](auto& c) { return c.key.method == m; })) {
        continue;
      }
      emit("curves_" + tag + "_" + slug(m) + ".svg",
           curves_svg(cells, m, m + ": accuracy vs weak labels (" + label + ")"));
    }
    summary += "== cost model " + std::to_string(cm) + ": " + label + " ==\n\n";
    summary += "Best accuracy (%) at cost <= budget, optimal weak fraction in parentheses\n";
    summary += table + "\nRegimes\n" + regimes_text(regimes) + "\n";
  }
  emit("report.txt", summary);
  return written;
}

}  // namespace elicit::harness
