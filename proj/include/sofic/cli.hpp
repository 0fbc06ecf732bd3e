#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sofic::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kChecksFailed = 1,
  kConfigError = 2,
  kResourceLimit = 3,
  kNumericFailure = 4,
};

/// Flattened configuration: dotted keys ("builder.L") to scalar text.
using ConfigMap = std::map<std::string, std::string>;

/// Flattens a JSON document (nested objects, scalars, arrays of scalars
/// joined by commas). Throws InvalidArgument on malformed input.
ConfigMap flatten_json(const std::string &text);

/// FNV-1a over the canonical JSON of `config`, excluding `threads` and
/// `output`; 16 lowercase hex digits.
std::string config_hash(const ConfigMap &config);

struct KeyInfo {
  std::string name;
  std::string help;
  unsigned commands; ///< bit mask over command_names()
};

const std::vector<std::string> &command_names();
const std::vector<KeyInfo> &config_keys();
/// Keys accepted by one subcommand, in registry order.
std::vector<std::string> keys_for(const std::string &command);

struct PlotCurve {
  std::string label;
  std::string color;
  bool steps = false; ///< x = jumps, y = values, drawn with base before x[0]
  double base = 0.0;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::vector<PlotCurve> curves;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  std::string title;
};

/// Self-contained SVG. Step curves are drawn with horizontal and vertical
/// segments only. Throws InvalidArgument for an empty curve list or bad ranges.
std::string render_svg(const PlotSpec &plot);

/// Runs the tool; argv[0] is the program name.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace sofic::cli
