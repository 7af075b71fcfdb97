#include "sepscope/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>

namespace sepscope {

namespace {

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string xml_escape(std::string_view s) {
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

template <class T>
T parse_value(const std::string& key, const std::string& v) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (v == "true" || v == "1") return true;
            if (v == "false" || v == "0") return false;
            throw boost::bad_lexical_cast();
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.empty() && v[0] == '-') throw boost::bad_lexical_cast();
            return boost::lexical_cast<T>(v);
        } else {
            return boost::lexical_cast<T>(v);
        }
    } catch (const boost::bad_lexical_cast&) {
        throw ConfigError("invalid value for '" + key + "': " + v);
    }
}

constexpr int kWidth = 640, kHeight = 420;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::pair<double, double> padded_range(const std::vector<double>& v) {
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (double x : v)
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!(lo <= hi)) return {0.0, 1.0};
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        const double pad = std::max(1e-3, 0.1 * std::abs(hi));
        return {lo - pad, hi + pad};
    }
    return {lo, hi};
}

void svg_axes(std::ostringstream& s, const Frame& f, const PlotLabels& labels) {
    const double xa = kLeft, xb = kWidth - kRight, ya = kTop, yb = kHeight - kBottom;
    s << "<rect x=\"" << xa << "\" y=\"" << ya << "\" width=\"" << xb - xa << "\" height=\"" << yb - ya
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = f.x0 + (f.x1 - f.x0) * t / 4.0, yv = f.y0 + (f.y1 - f.y0) * t / 4.0;
        s << "<text x=\"" << fmt_fixed(f.px(xv), 1) << "\" y=\"" << yb + 18 << "\" text-anchor=\"middle\">"
          << xml_escape(format_double(std::round(xv * 1e4) / 1e4)) << "</text>\n";
        s << "<text x=\"" << xa - 6 << "\" y=\"" << fmt_fixed(f.py(yv) + 4, 1) << "\" text-anchor=\"end\">"
          << xml_escape(format_double(std::round(yv * 1e4) / 1e4)) << "</text>\n";
    }
    s << "<text x=\"" << (xa + xb) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << xml_escape(labels.x_label) << "</text>\n";
    s << "<text x=\"16\" y=\"" << (ya + yb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (ya + yb) / 2 << ")\">" << xml_escape(labels.y_label) << "</text>\n";
    s << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\">" << xml_escape(labels.title)
      << "</text>\n";
}

std::string svg_open() {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return s.str();
}

// Perceptually ordered ramp from dark blue through to yellow.
std::string ramp(double t) {
    static constexpr std::array<std::array<int, 3>, 5> stops{
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                  static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                  static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
    return buf;
}

enum class Kind { Number, Integer, String, Boolean, Object, Array };

bool has_kind(const Json& v, Kind k) {
    switch (k) {
        case Kind::Number: return v.is_number() || v.is_null();  // NaN is serialized as null
        case Kind::Integer: return v.is_number_integer();
        case Kind::String: return v.is_string();
        case Kind::Boolean: return v.is_boolean();
        case Kind::Object: return v.is_object();
        case Kind::Array: return v.is_array();
    }
    return false;
}

const std::map<std::string, std::vector<std::pair<std::string, Kind>>>& schemas() {
    using K = Kind;
    static const std::map<std::string, std::vector<std::pair<std::string, Kind>>> s{
        {"sepscope.profile/1",
         {{"axis", K::String}, {"field", K::String}, {"sampler", K::String}, {"seed", K::Integer},
          {"n_samples", K::Integer}, {"grid_points", K::Integer}, {"probability", K::Number},
          {"stderr", K::Number}, {"total_weight", K::Number}, {"generator", K::String}}},
        {"sepscope.volume/1",
         {{"field", K::String}, {"n_samples", K::Integer}, {"estimate", K::Number}, {"stderr", K::Number},
          {"expected", K::Number}, {"z_score", K::Number}, {"relative_error", K::Number}}},
        {"sepscope.bloore/1",
         {{"integral", K::Object}, {"probability", K::Object}, {"complex_identity", K::String}, {"pass", K::Boolean}}},
        {"sepscope.fit/1", {{"model", K::String}, {"params", K::Array}, {"rms_residual", K::Number}}},
        {"sepscope.viz-rebit/1",
         {{"measure_definition", K::String}, {"plane", K::Object}, {"extruded", K::Object}, {"samples_used", K::Integer},
          {"samples_skipped", K::Integer}}},
        {"sepscope.viz-qubit/1",
         {{"separability", K::Number}, {"separability_stderr", K::Number}, {"tally", K::Object},
          {"negative_jacobian", K::Integer}, {"negative_fraction", K::Number}, {"outside_tetrahedron", K::Integer},
          {"samples_skipped", K::Integer}}},
    };
    return s;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream s;
    s << "subcommand=" << c.subcommand << '\n'
      << "field=" << to_string(c.field) << '\n'
      << "sampler=" << to_string(c.sampler) << '\n'
      << "angles=" << to_string(c.angles) << '\n'
      << "seed=" << c.seed << '\n'
      << "samples=" << c.samples << '\n'
      << "grid=" << c.grid << '\n'
      << "workers=" << c.workers << '\n'
      << "out=" << c.out << '\n'
      << "checkpoint=" << c.checkpoint << '\n'
      << "resume=" << (c.resume ? "true" : "false") << '\n'
      << "paper-scale=" << (c.paper_scale ? "true" : "false") << '\n'
      << "bins=" << c.bins << '\n'
      << "entry-bound=" << format_double(c.entry_bound) << '\n'
      << "disk-radius=" << format_double(c.disk_radius) << '\n'
      << "input=" << boost::algorithm::join(c.inputs, ",") << '\n'
      << "model=" << c.model << '\n'
      << "alpha=" << format_double(c.alpha) << '\n';
    return s.str();
}

RunConfig parse_config_text(std::string_view text, RunConfig c) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        boost::algorithm::trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = boost::algorithm::trim_copy(line.substr(0, eq));
        std::string v = boost::algorithm::trim_copy(line.substr(eq + 1));
        try {
            if (key == "subcommand") c.subcommand = v;
            else if (key == "field") c.field = parse_field(v);
            else if (key == "sampler") c.sampler = parse_sampler_kind(v);
            else if (key == "angles") c.angles = parse_angular_density(v);
            else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, v);
            else if (key == "samples") c.samples = parse_value<std::uint64_t>(key, v);
            else if (key == "grid") c.grid = parse_value<std::uint64_t>(key, v);
            else if (key == "workers") c.workers = parse_value<unsigned>(key, v);
            else if (key == "out") c.out = v;
            else if (key == "checkpoint") c.checkpoint = v;
            else if (key == "resume") c.resume = parse_value<bool>(key, v);
            else if (key == "paper-scale") c.paper_scale = parse_value<bool>(key, v);
            else if (key == "bins") c.bins = parse_value<std::uint64_t>(key, v);
            else if (key == "entry-bound") c.entry_bound = parse_value<double>(key, v);
            else if (key == "disk-radius") c.disk_radius = parse_value<double>(key, v);
            else if (key == "input") {
                c.inputs.clear();
                if (!v.empty()) boost::algorithm::split(c.inputs, v, boost::is_any_of(","));
            } else if (key == "model") c.model = v;
            else if (key == "alpha") c.alpha = parse_value<double>(key, v);
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("invalid value for '" + key + "': " + e.what());
        }
    }
    return c;
}

Json config_json(const RunConfig& c) {
    Json j;
    j["subcommand"] = c.subcommand;
    j["field"] = to_string(c.field);
    j["sampler"] = to_string(c.sampler);
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    j["grid"] = c.grid;
    j["paper_scale"] = c.paper_scale;
    if (c.subcommand == "radial" || c.subcommand == "azimuthal" || c.subcommand == "volume-check") j["angles"] = to_string(c.angles);
    if (c.subcommand == "viz-qubit") {
        j["bins"] = c.bins;
        j["entry_bound"] = c.entry_bound;
    }
    if (c.subcommand == "viz-rebit") j["disk_radius"] = c.disk_radius;
    if (c.subcommand == "fit") {
        j["model"] = c.model;
        j["alpha"] = c.alpha;
    }
    return j;
}

std::filesystem::path sibling_path(const std::filesystem::path& out, std::string_view ext) {
    auto p = out;
    p.replace_extension(std::string(ext));
    return p;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string profile_csv(const ProfileEstimate& p) {
    std::string s = "abscissa,value,stderr\n";
    for (size_t j = 0; j < p.grid.size(); ++j)
        s += format_double(p.grid[j]) + ',' + format_double(p.value[j]) + ',' + format_double(p.stderr_[j]) + '\n';
    return s;
}

ProfileEstimate parse_profile_csv(std::string_view text, Axis axis, Field field) {
    ProfileEstimate p;
    p.axis = axis;
    p.field = field;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || boost::algorithm::trim_copy(line) != "abscissa,value,stderr")
        throw IoError("profile CSV must start with the header abscissa,value,stderr");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        std::vector<std::string> cols;
        boost::algorithm::split(cols, line, boost::is_any_of(","));
        if (cols.size() != 3) throw IoError("profile CSV line " + std::to_string(lineno) + ": expected 3 columns");
        try {
            p.grid.push_back(boost::lexical_cast<double>(cols[0]));
            p.value.push_back(boost::lexical_cast<double>(cols[1]));
            p.stderr_.push_back(boost::lexical_cast<double>(cols[2]));
        } catch (const boost::bad_lexical_cast&) {
            throw IoError("profile CSV line " + std::to_string(lineno) + ": not a number");
        }
    }
    if (p.grid.size() < 2) throw IoError("profile CSV has fewer than 2 rows");
    return p;
}

std::string surface_csv(std::string_view x_name, std::string_view y_name, std::string_view value_name,
                        const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& values) {
    if (values.size() != xs.size() * ys.size()) throw std::invalid_argument("surface_csv: size mismatch");
    std::string s = std::string(x_name) + ',' + std::string(y_name) + ',' + std::string(value_name) + '\n';
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < ys.size(); ++j)
            s += format_double(xs[i]) + ',' + format_double(ys[j]) + ',' + format_double(values[i * ys.size() + j]) + '\n';
    return s;
}

std::string svg_line_plot(const std::vector<double>& x, const std::vector<double>& y, const PlotLabels& labels) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("svg_line_plot: need matching x/y of size >= 2");
    const auto [x0, x1] = padded_range(x);
    const auto [y0, y1] = padded_range(y);
    const Frame f{x0, x1, y0, y1};
    std::ostringstream s;
    s << svg_open();
    svg_axes(s, f, labels);
    s << "<polyline fill=\"none\" stroke=\"#1f4e9a\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(y[i])) continue;
        s << (i ? " " : "") << fmt_fixed(f.px(x[i]), 2) << ',' << fmt_fixed(f.py(y[i]), 2);
    }
    s << "\"/>\n</svg>\n";
    return s.str();
}

std::string svg_heat_map(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& values,
                         const PlotLabels& labels) {
    if (xs.size() < 2 || ys.size() < 2 || values.size() != xs.size() * ys.size())
        throw std::invalid_argument("svg_heat_map: size mismatch");
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    const double dy = (ys.back() - ys.front()) / static_cast<double>(ys.size() - 1);
    const Frame f{xs.front() - dx / 2, xs.back() + dx / 2, ys.front() - dy / 2, ys.back() + dy / 2};
    const auto [v0, v1] = padded_range(values);
    std::ostringstream s;
    s << svg_open();
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < ys.size(); ++j) {
            const double xa = f.px(xs[i] - dx / 2), xb = f.px(xs[i] + dx / 2);
            const double ya = f.py(ys[j] + dy / 2), yb = f.py(ys[j] - dy / 2);
            s << "<rect x=\"" << fmt_fixed(xa, 2) << "\" y=\"" << fmt_fixed(ya, 2) << "\" width=\""
              << fmt_fixed(xb - xa + 0.3, 2) << "\" height=\"" << fmt_fixed(yb - ya + 0.3, 2) << "\" fill=\""
              << ramp((values[i * ys.size() + j] - v0) / (v1 - v0)) << "\"/>\n";
        }
    svg_axes(s, f, labels);
    s << "</svg>\n";
    return s.str();
}

Json summary_envelope(std::string_view schema, const RunConfig& cfg) {
    Json j;
    j["schema"] = std::string(schema);
    j["code_version"] = SEPSCOPE_VERSION;
    j["config"] = config_json(cfg);
    return j;
}

std::vector<std::string> validate_summary(const Json& doc) {
    std::vector<std::string> errors;
    if (!doc.is_object()) return {"document is not an object"};
    if (!doc.contains("schema") || !doc["schema"].is_string()) return {"missing schema id"};
    const auto it = schemas().find(doc["schema"].get<std::string>());
    if (it == schemas().end()) return {"unknown schema " + doc["schema"].get<std::string>()};
    if (!doc.contains("code_version") || !doc["code_version"].is_string()) errors.push_back("missing code_version");
    if (!doc.contains("config") || !doc["config"].is_object()) errors.push_back("missing config");
    for (const auto& [key, kind] : it->second) {
        if (!doc.contains(key)) errors.push_back("missing " + key);
        else if (!has_kind(doc[key], kind)) errors.push_back("wrong type for " + key);
    }
    return errors;
}

std::vector<std::string> known_schemas() {
    std::vector<std::string> out;
    for (const auto& [k, v] : schemas()) out.push_back(k);
    return out;
}

}  // namespace sepscope
