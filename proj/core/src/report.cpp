#include "stylesplit/report.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace stylesplit {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string misclass_text(const GridRowReport& r) {
  return r.misclassified ? std::to_string(*r.misclassified) : "NA";
}

}  // namespace

RenderedReport render_report(const std::vector<GridRowReport>& rows) {
  RenderedReport out;
  std::ostringstream csv;
  csv << "variation,magnitude,misclassified,mixture_dsc,mixture_sdsc,specific_dsc,specific_sdsc,"
         "dsc_improvement_pct,sdsc_improvement_pct\n";
  for (const auto& r : rows) {
    csv << csv_field(r.variation) << ',' << csv_field(r.magnitude) << ',' << misclass_text(r) << ','
        << fixed(r.mixture.dsc, 6) << ',' << fixed(r.mixture.sdsc, 6) << ',' << fixed(r.specific.dsc, 6) << ','
        << fixed(r.specific.sdsc, 6) << ',' << fixed(r.dsc_improvement(), 4) << ','
        << fixed(r.sdsc_improvement(), 4) << '\n';
  }
  out.csv = csv.str();

  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) j.push_back(r.to_json());
  out.json = j.dump(2) + "\n";

  std::ostringstream md;
  md << "| Variations | Size (px) | Misclass. | Mixture DSC | Mixture SDSC | Specific DSC | Specific SDSC "
        "| Improvement DSC (%) | Improvement SDSC (%) |\n";
  md << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    md << "| " << r.variation << " | " << r.magnitude << " | " << misclass_text(r) << " | "
       << fixed(r.mixture.dsc, 2) << " | " << fixed(r.mixture.sdsc, 2) << " | " << fixed(r.specific.dsc, 2)
       << " | " << fixed(r.specific.sdsc, 2) << " | " << fixed(r.dsc_improvement(), 2) << " | "
       << fixed(r.sdsc_improvement(), 2) << " |\n";
  }
  out.markdown = md.str();
  return out;
}

std::string render_correlation_csv(const CorrelationReport& report) {
  std::ostringstream csv;
  csv << "distance,bits,F,G,optimum\n";
  for (const auto& p : report.points)
    csv << p.distance << ',' << p.partition.to_string() << ',' << fixed(p.f, 8) << ',' << fixed(p.g, 8) << ','
        << (p.optimum ? 1 : 0) << '\n';
  return csv.str();
}

std::string render_correlation_markdown(const CorrelationReport& report) {
  std::ostringstream md;
  md << "Pearson rho(F, G) = " << fixed(report.rho, 4) << " over " << report.points.size() << " solutions\n\n";
  md << "| Hamming distance | mean F | mean G |\n|---|---|---|\n";
  std::map<int, std::pair<double, int>> f, g;
  for (const auto& p : report.points) {
    f[p.distance].first += p.f;
    ++f[p.distance].second;
    g[p.distance].first += p.g;
    ++g[p.distance].second;
  }
  for (const auto& [d, fv] : f)
    md << "| " << d << " | " << fixed(fv.first / fv.second, 3) << " | " << fixed(g[d].first / g[d].second, 3)
       << " |\n";
  return md.str();
}

std::string render_jsonl(const std::vector<nlohmann::json>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  return out;
}

}  // namespace stylesplit
