#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sepscope/profile.hpp"

namespace sepscope {

using Json = nlohmann::ordered_json;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything that determines a run. Serialized as flat `key=value` lines whose keys are the
/// long CLI flag names.
struct RunConfig {
    std::string subcommand;
    Field field = Field::Rebit;
    SamplerKind sampler = SamplerKind::MonteCarlo;
    AngularDensity angles = AngularDensity::Jacobian;  // radial, azimuthal, volume-check
    std::uint64_t seed = 42;
    std::uint64_t samples = 100000;
    std::uint64_t grid = 101;
    unsigned workers = 1;
    std::string out;
    std::string checkpoint;
    bool resume = false;
    bool paper_scale = false;
    std::uint64_t bins = 7;
    double entry_bound = 500.0;
    double disk_radius = 0.9;
    std::vector<std::string> inputs;  // fit: profile CSVs
    std::string model;                // fit: beta-tail | cosine | power
    double alpha = 1.5;

    bool operator==(const RunConfig&) const = default;
};

std::string to_config_text(const RunConfig& cfg);
/// Applies the `key=value` lines of `text` on top of `base`. Blank lines and lines starting with
/// '#' are ignored. Throws ConfigError on unknown keys or malformed values.
RunConfig parse_config_text(std::string_view text, RunConfig base = {});

/// The result-determining part of the config (everything except workers and file paths).
Json config_json(const RunConfig& cfg);

/// Shortest round-trip decimal form, independent of locale.
std::string format_double(double v);

/// `out` with its extension replaced (or appended) by `ext`, e.g. p.csv -> p.json.
std::filesystem::path sibling_path(const std::filesystem::path& out, std::string_view ext);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

std::string profile_csv(const ProfileEstimate& p);
/// Parses `abscissa,value,stderr` rows. Throws IoError on malformed content.
ProfileEstimate parse_profile_csv(std::string_view text, Axis axis, Field field);

/// Rows `x_name,y_name,value_name` over the product grid, x outermost.
std::string surface_csv(std::string_view x_name, std::string_view y_name, std::string_view value_name,
                        const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& values);

struct PlotLabels {
    std::string title;
    std::string x_label;
    std::string y_label;
};

std::string svg_line_plot(const std::vector<double>& x, const std::vector<double>& y, const PlotLabels& labels);
/// `values` is row-major with x outermost (values[i * ys.size() + j] at (xs[i], ys[j])).
std::string svg_heat_map(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::vector<double>& values, const PlotLabels& labels);

/// Common envelope of every result file: schema id, code version, config.
Json summary_envelope(std::string_view schema, const RunConfig& cfg);

/// Checks a result document against the schema named in its "schema" member. Returns the list
/// of violations (empty when valid).
std::vector<std::string> validate_summary(const Json& doc);

/// Schema identifiers understood by validate_summary.
std::vector<std::string> known_schemas();

}  // namespace sepscope
