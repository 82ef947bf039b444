#include "optinstall/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <utility>

#include "optinstall/error.hpp"

namespace optinstall {

namespace {

constexpr std::string_view kHeader = "week_start,zone,price_eur_mwh,pv_mwh,wind_mwh";
constexpr std::array<std::string_view, 5> kColumns = {"week_start", "zone", "price_eur_mwh",
                                                      "pv_mwh", "wind_mwh"};

std::size_t zone_order(std::string_view zone) {
  const auto it = std::find(kZoneNames.begin(), kZoneNames.end(), zone);
  return static_cast<std::size_t>(it - kZoneNames.begin());
}

std::string where(std::string_view source, std::size_t row, std::string_view column) {
  return std::string(source) + ": row " + std::to_string(row) + ", column '" +
         std::string(column) + "'";
}

double parse_number(std::string_view field, std::string_view source, std::size_t row,
                    std::string_view column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    throw InputError(where(source, row, column) + ": not a number: '" + std::string(field) +
                     "'");
  return value;
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

bool is_known_zone(std::string_view zone) { return zone_order(zone) < kZoneNames.size(); }

long parse_iso_date(std::string_view text) {
  using namespace std::chrono;
  auto bad = [&] { return InputError("invalid ISO-8601 date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc() || ptr != text.data() + pos + len) throw bad();
    return v;
  };
  const year_month_day ymd{year{field(0, 4)}, month{static_cast<unsigned>(field(5, 2))},
                           day{static_cast<unsigned>(field(8, 2))}};
  if (!ymd.ok()) throw bad();
  return sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(long d) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{d}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

void ZonalDataset::validate() const {
  const auto n = observations.size();
  if (n < 2) throw InputError("dataset '" + zone_name + "' needs at least 2 observations");
  if (national_pv.size() != n || national_wind.size() != n)
    throw InputError("dataset '" + zone_name + "': national series length mismatch");
  if (!(dt_years > 0.0)) throw InputError("dt_years must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = observations[i];
    if (o.week_index != static_cast<long>(i))
      throw InputError("dataset '" + zone_name + "': week_index not consecutive at " +
                       std::to_string(i));
    if (o.pv_production < 0.0 || o.wind_production < 0.0 || national_pv[i] < 0.0 ||
        national_wind[i] < 0.0)
      throw InputError("dataset '" + zone_name + "': negative production at week " +
                       std::to_string(i));
  }
}

ZonalTable read_zonal_table(std::istream& in, std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(std::string(source) + ": empty dataset");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kHeader)
    throw InputError(std::string(source) + ": header must be '" + std::string(kHeader) + "'");

  std::map<std::pair<long, std::size_t>, ZonalRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != kColumns.size()) {
      const auto missing = std::min(fields.size(), kColumns.size() - 1);
      throw InputError(where(source, row, kColumns[missing]) + ": expected " +
                       std::to_string(kColumns.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    ZonalRow r;
    try {
      r.day = parse_iso_date(fields[0]);
    } catch (const InputError& e) {
      throw InputError(where(source, row, kColumns[0]) + ": " + e.what());
    }
    r.zone = std::string(fields[1]);
    if (!is_known_zone(r.zone))
      throw InputError(where(source, row, kColumns[1]) + ": unknown zone '" + r.zone + "'");
    r.price = parse_number(fields[2], source, row, kColumns[2]);
    r.pv = parse_number(fields[3], source, row, kColumns[3]);
    r.wind = parse_number(fields[4], source, row, kColumns[4]);
    if (r.pv < 0.0) throw InputError(where(source, row, kColumns[3]) + ": negative production");
    if (r.wind < 0.0)
      throw InputError(where(source, row, kColumns[4]) + ": negative production");
    const auto key = std::make_pair(r.day, zone_order(r.zone));
    if (rows.count(key))
      throw InputError(where(source, row, kColumns[0]) + ": duplicate week_index for zone " +
                       r.zone + " on " + std::string(fields[0]));
    rows.emplace(key, std::move(r));
  }
  if (rows.empty()) throw InputError(std::string(source) + ": empty dataset");

  ZonalTable table;
  table.rows.reserve(rows.size());
  std::map<long, std::size_t> per_week;
  for (auto& [key, r] : rows) ++per_week[key.first];
  long previous = per_week.begin()->first;
  for (const auto& [day, count] : per_week) {
    if (day != previous && day - previous != 7)
      throw InputError(std::string(source) + ": weeks " + format_iso_date(previous) + " and " +
                       format_iso_date(day) + " are not 7 days apart");
    previous = day;
  }
  for (auto& [key, r] : rows) table.rows.push_back(std::move(r));
  return table;
}

ZonalTable read_zonal_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  return read_zonal_table(in, path);
}

void write_zonal_table(const ZonalTable& table, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& r : table.rows)
    out << format_iso_date(r.day) << ',' << r.zone << ',' << format_number(r.price) << ','
        << format_number(r.pv) << ',' << format_number(r.wind) << '\n';
}

void write_zonal_table(const ZonalTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_zonal_table(table, out);
}

ZonalDataset ZonalTable::dataset(std::string_view zone, double dt_years) const {
  if (!is_known_zone(zone))
    throw InputError("unknown zone '" + std::string(zone) + "'");
  if (std::none_of(rows.begin(), rows.end(), [&](const ZonalRow& r) { return r.zone == zone; }))
    throw InputError("zone '" + std::string(zone) + "' is absent from the dataset");
  ZonalDataset ds;
  ds.zone_name = std::string(zone);
  ds.dt_years = dt_years;
  std::size_t i = 0;
  while (i < rows.size()) {
    const long day = rows[i].day;
    std::size_t j = i;
    double pv = 0.0;
    double wind = 0.0;
    const ZonalRow* own = nullptr;
    for (; j < rows.size() && rows[j].day == day; ++j) {
      pv += rows[j].pv;
      wind += rows[j].wind;
      if (rows[j].zone == zone) own = &rows[j];
    }
    if (j - i != kZoneNames.size())
      throw InputError("week " + format_iso_date(day) + " has " + std::to_string(j - i) +
                       " of " + std::to_string(kZoneNames.size()) +
                       " zones; national totals need all of them");
    if (!own)
      throw InputError("zone '" + std::string(zone) + "' has no row for week " +
                       format_iso_date(day));
    ds.observations.push_back({static_cast<long>(ds.observations.size()), own->price, own->pv,
                               own->wind});
    ds.national_pv.push_back(pv);
    ds.national_wind.push_back(wind);
    i = j;
  }
  ds.validate();
  return ds;
}

ZonalDataset load_zonal_csv(const std::string& path, std::string_view zone, double dt_years) {
  return read_zonal_table(path).dataset(zone, dt_years);
}

InstalledPowerProxy installed_power_proxy(const std::vector<double>& national_production,
                                          SourceKind kind) {
  if (national_production.empty()) throw InputError("installed_power_proxy: empty input");
  InstalledPowerProxy proxy;
  proxy.source_kind = kind;
  proxy.values.reserve(national_production.size());
  double running = national_production.front();
  for (std::size_t i = 0; i < national_production.size(); ++i) {
    const double v = national_production[i];
    if (!(v >= 0.0))
      throw InputError("installed_power_proxy: negative entry at " + std::to_string(i));
    running = std::max(running, v);
    proxy.values.push_back(running);
  }
  return proxy;
}

AlignedSeries align(const ZonalDataset& dataset) {
  if (dataset.national_pv.size() != dataset.size() ||
      dataset.national_wind.size() != dataset.size())
    throw InputError("align: national series length does not match zonal series");
  dataset.validate();
  AlignedSeries out;
  out.price.reserve(dataset.size());
  for (const auto& o : dataset.observations) out.price.push_back(o.price);
  out.pv = installed_power_proxy(dataset.national_pv, SourceKind::photovoltaic);
  out.wind = installed_power_proxy(dataset.national_wind, SourceKind::wind);
  return out;
}

}  // namespace optinstall
