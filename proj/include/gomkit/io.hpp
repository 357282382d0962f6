#ifndef GOMKIT_IO_HPP
#define GOMKIT_IO_HPP

#include <string>
#include <vector>

#include "gomkit/dexterity.hpp"
#include "gomkit/gom.hpp"
#include "gomkit/metrics.hpp"
#include "gomkit/preprocess.hpp"
#include "gomkit/recognition.hpp"

namespace gomkit {

/// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

// GomSystem <-> versioned JSON document. Coefficients are keyed
// "SENSOR.axis"; topology edges carry their assumption tags.
std::string system_to_json(const GomSystem& system);
GomSystem system_from_json(const std::string& text);
void save_system(const std::string& path, const GomSystem& system);
GomSystem load_system(const std::string& path);

// UnwrapLog <-> versioned JSON ({version, channel, corrections:[[frame, offset]]}).
std::string unwrap_log_to_json(const UnwrapLog& log, const std::string& channel);
std::pair<UnwrapLog, std::string> unwrap_log_from_json(const std::string& text);

// CvReport JSON + the one-line CSV row
// (vocabulary,n_classes,sensors,accuracy,f1).
std::string cv_report_to_json(const CvReport& report);
std::string cv_report_csv_row(const std::string& vocabulary, const CvReport& report,
                              const std::vector<std::string>& sensors);

/// Metrics CSV matching the appendix table columns:
/// gesture,repetitions,rmse,mae,avg_u1.
std::string metrics_csv(const std::vector<std::pair<std::string, MetricReport>>& rows);

/// Sensor significance counts as CSV (sensor,count), ranking order.
std::string ranking_csv(const SensorRanking& ranking);

} // namespace gomkit

#endif
