#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "optinstall/params.hpp"

namespace optinstall {

/// Zone labels accepted in the CSV `zone` column.
inline constexpr std::array<std::string_view, 6> kZoneNames = {
    "North", "CentralNorth", "CentralSouth", "South", "Sicily", "Sardinia"};

bool is_known_zone(std::string_view zone);

struct ZonalObservation {
  long week_index = 0;           ///< 0-based, consecutive
  double price = 0.0;            ///< EUR/MWh, may be negative
  double pv_production = 0.0;    ///< MWh
  double wind_production = 0.0;  ///< MWh

  bool operator==(const ZonalObservation&) const = default;
};

struct ZonalDataset {
  std::string zone_name;
  std::vector<ZonalObservation> observations;
  std::vector<double> national_pv;
  std::vector<double> national_wind;
  double dt_years = 1.0 / 52.0;

  std::size_t size() const { return observations.size(); }
  void validate() const;

  bool operator==(const ZonalDataset&) const = default;
};

/// One row of the long-format file.
struct ZonalRow {
  long day = 0;  ///< days since 1970-01-01 of week_start
  std::string zone;
  double price = 0.0;
  double pv = 0.0;
  double wind = 0.0;

  bool operator==(const ZonalRow&) const = default;
};

/// Every row of a zonal CSV file, sorted by (week, zone order), weeks spaced
/// exactly seven days apart.
struct ZonalTable {
  std::vector<ZonalRow> rows;

  /// Requires every week to carry all six zones (national totals).
  ZonalDataset dataset(std::string_view zone, double dt_years = 1.0 / 52.0) const;

  bool operator==(const ZonalTable&) const = default;
};

/// Parses `week_start,zone,price_eur_mwh,pv_mwh,wind_mwh`.
/// Throws InputError naming the offending row and column.
ZonalTable read_zonal_table(std::istream& in, std::string_view source = "<stream>");
ZonalTable read_zonal_table(const std::string& path);

void write_zonal_table(const ZonalTable& table, std::ostream& out);
void write_zonal_table(const ZonalTable& table, const std::string& path);

ZonalDataset load_zonal_csv(const std::string& path, std::string_view zone,
                            double dt_years = 1.0 / 52.0);

struct InstalledPowerProxy {
  std::vector<double> values;  ///< MW-equivalent of rated production
  SourceKind source_kind = SourceKind::photovoltaic;
};

/// Running maximum of national production.
InstalledPowerProxy installed_power_proxy(const std::vector<double>& national_production,
                                          SourceKind kind);

struct AlignedSeries {
  std::vector<double> price;
  InstalledPowerProxy pv;
  InstalledPowerProxy wind;
};

AlignedSeries align(const ZonalDataset& dataset);

/// ISO-8601 calendar date <-> days since 1970-01-01.
long parse_iso_date(std::string_view text);
std::string format_iso_date(long day);

}  // namespace optinstall
