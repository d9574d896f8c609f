#pragma once

#include <iosfwd>
#include <string>

#include "gridpv/engine.hpp"

namespace gridpv {

/// Column order of the time-series file.
inline constexpr const char* kTimeseriesHeader =
    "time,u_g_r,u_g_s,u_g_t,i_r,i_s,i_t,v_dc,i_p,p,q,v_fault,omega_est,mode";

/// One row every `decimation` plant samples, starting with the first.
void write_timeseries(std::ostream& os, const Series& s, int decimation);

/// Flat `key = value` lines, one per metric.
void write_metrics(std::ostream& os, const RunResult& r);

void write_timeseries_file(const std::string& path, const Series& s, int decimation);
void write_metrics_file(const std::string& path, const RunResult& r);

} // namespace gridpv
