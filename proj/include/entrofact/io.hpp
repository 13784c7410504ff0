// File formats: regions and models as JSON, exact tables / functions as the
// "ENTF1" binary columnar format (JSON header + little-endian f64 column),
// and CSV series.
#pragma once

#include <bit>
#include <fstream>

#include <json.hpp>

#include "entrofact/gibbs.hpp"

namespace entrofact {

static_assert(std::endian::native == std::endian::little,
              "ENTF1 files are written little-endian");

using json = nlohmann::json;

// Region <-> JSON array of integer arrays, canonical (lexicographic) order.
inline json region_to_json(const Region& r) {
  json arr = json::array();
  for (const auto& p : r.points()) arr.push_back(p);
  return arr;
}

inline Region region_from_json(const json& j, int dim_hint = 0) {
  if (!j.is_array()) throw config_error("region JSON must be an array");
  std::vector<Point> pts;
  int dim = dim_hint;
  for (const auto& e : j) {
    Point p = e.get<Point>();
    if (dim == 0) dim = static_cast<int>(p.size());
    pts.push_back(std::move(p));
  }
  if (pts.empty()) return dim > 0 ? Region(dim) : Region();
  return Region(dim, std::move(pts));
}

// Model <-> JSON {q, pair, site}; pair entries are numbers or the "-inf"
// literal for hard constraints.
inline json model_to_json(const SpinModel& m) {
  json pair = json::array();
  for (int s = 0; s < m.q(); ++s) {
    json row = json::array();
    for (int t = 0; t < m.q(); ++t) {
      const auto& u = m.pair(s, t);
      if (u.forbidden)
        row.push_back("-inf");
      else
        row.push_back(u.value);
    }
    pair.push_back(std::move(row));
  }
  json site = json::array();
  for (int s = 0; s < m.q(); ++s) site.push_back(m.site(s));
  return json{{"q", m.q()}, {"pair", pair}, {"site", site}};
}

inline SpinModel model_from_json(const json& j) {
  int q = j.at("q").get<int>();
  std::vector<PairPotential> pair(static_cast<std::size_t>(q) * q);
  const auto& pj = j.at("pair");
  if (!pj.is_array() || static_cast<int>(pj.size()) != q)
    throw config_error("model pair matrix must be q x q");
  for (int s = 0; s < q; ++s) {
    const auto& row = pj.at(s);
    if (!row.is_array() || static_cast<int>(row.size()) != q)
      throw config_error("model pair matrix must be q x q");
    for (int t = 0; t < q; ++t) {
      const auto& e = row.at(t);
      if (e.is_string()) {
        if (e.get<std::string>() != "-inf")
          throw config_error("pair entries must be numbers or \"-inf\"");
        pair[s * q + t].forbidden = true;
      } else {
        pair[s * q + t].value = e.get<double>();
      }
    }
  }
  std::vector<double> site = j.at("site").get<std::vector<double>>();
  return SpinModel(q, std::move(pair), std::move(site));
}

// --- ENTF1 binary column -----------------------------------------------

inline void write_entf1(const std::string& path, const json& header,
                        std::span<const double> column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open " + path + " for writing");
  out.write("ENTF1", 5);
  std::string h = header.dump();
  std::uint32_t hlen = static_cast<std::uint32_t>(h.size());
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(h.data(), h.size());
  std::uint64_t count = column.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(column.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw error("short write to " + path);
}

struct Entf1File {
  json header;
  std::vector<double> column;
};

inline Entf1File read_entf1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::string(magic, 5) != "ENTF1")
    throw error(path + " is not an ENTF1 file");
  std::uint32_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string h(hlen, '\0');
  in.read(h.data(), hlen);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  Entf1File f;
  f.header = json::parse(h);
  f.column.resize(count);
  in.read(reinterpret_cast<char*>(f.column.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw error("truncated ENTF1 file " + path);
  return f;
}

inline json table_header(const GibbsTable& t) {
  return json{{"region", region_to_json(t.region())},
              {"model_hash", hex_digest(t.model().hash())},
              {"boundary_hash", hex_digest(t.tau().hash())},
              {"log_z", t.log_z()}};
}

inline void write_table_entf1(const std::string& path, const GibbsTable& t) {
  write_entf1(path, table_header(t), t.probs());
}

inline void write_function_entf1(const std::string& path, const GibbsTable& t,
                                 const ConfigFunction& f) {
  write_entf1(path, table_header(t), f.values);
}

// --- CSV -----------------------------------------------------------------

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows,
                      const std::string& comment = "") {
  std::ofstream out(path);
  if (!out) throw error("cannot open " + path + " for writing");
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
  out.precision(17);
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw config_error("csv row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << row[c] << (c + 1 < row.size() ? ',' : '\n');
  }
}

}  // namespace entrofact
