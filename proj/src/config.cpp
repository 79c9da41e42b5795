#include "bjj/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace bjj {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw config_error("config: " + where + ": not a number: '" + s + "'");
}

std::vector<double> parse_array(const std::string& s, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_num(trim(item), where));
    if (out.empty())
        throw config_error("config: " + where + ": empty array");
    return out;
}

} // namespace

PotentialSpec AppConfig::potential_spec() const {
    units.validate();
    PotentialSpec spec;
    spec.units = units;
    spec.lambda0 = lambda0;
    spec.g = g;
    if (family) spec.family = *family;
    if (!spec.in_domain(spec.lambda0))
        throw config_error("config: lambda0 = " + std::to_string(lambda0) +
                           " lies outside the well-family domain");
    return spec;
}

AppConfig parse_config_text(const std::string& text) {
    AppConfig cfg;
    std::vector<double> tab_lambda, tab_d, tab_barrier;
    std::optional<double> lambda1, amp_coeff;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto cut = raw.find_first_of("#;");
        std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (line.empty()) continue;
        const std::string at = " (line " + std::to_string(line_no) + ")";

        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config: malformed section header" + at);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "units" && section != "potential" && section != "drive")
                throw config_error("config: unknown section [" + section + "]" + at);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: expected key = value" + at);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section.empty())
            throw config_error("config: key '" + key + "' before any section" + at);
        const std::string where = "[" + section + "] " + key;

        if (section == "units") {
            if (key == "length_um")      cfg.units.length_um = parse_num(val, where);
            else if (key == "energy_hz") cfg.units.energy_hz = parse_num(val, where);
            else if (key == "time_ms")   cfg.units.time_ms = parse_num(val, where);
            else throw config_error("config: unknown key '" + key + "' in [units]" + at);
        } else if (section == "potential") {
            if (key == "lambda0")      cfg.lambda0 = parse_num(val, where);
            else if (key == "g")       cfg.g = parse_num(val, where);
            else if (key == "lambda")  tab_lambda = parse_array(val, where);
            else if (key == "d")       tab_d = parse_array(val, where);
            else if (key == "barrier") tab_barrier = parse_array(val, where);
            else throw config_error("config: unknown key '" + key + "' in [potential]" + at);
        } else { // drive
            if (key == "omega")        cfg.drive_omega = parse_num(val, where);
            else if (key == "lambda1") lambda1 = parse_num(val, where);
            else if (key == "amplitude_coefficient") amp_coeff = parse_num(val, where);
            else if (key == "variant") cfg.variant = drive_variant_from_string(val);
            else throw config_error("config: unknown key '" + key + "' in [drive]" + at);
        }
    }

    const bool any_table = !tab_lambda.empty() || !tab_d.empty() || !tab_barrier.empty();
    if (any_table) {
        if (tab_lambda.empty() || tab_d.empty() || tab_barrier.empty())
            throw config_error(
                "config: [potential] table override needs all of lambda, d, barrier");
        if (tab_lambda.size() != tab_d.size() || tab_lambda.size() != tab_barrier.size())
            throw config_error("config: [potential] lambda/d/barrier lengths differ");
        if (tab_lambda.size() < 2)
            throw config_error("config: [potential] tables need at least 2 knots");
        cfg.family = WellFamily(tab_lambda, tab_d, tab_barrier);
    }

    if (lambda1 && amp_coeff)
        throw config_error(
            "config: [drive] lambda1 and amplitude_coefficient are mutually exclusive");
    if (lambda1) cfg.amplitude = AmplitudeRule{true, *lambda1};
    if (amp_coeff) cfg.amplitude = AmplitudeRule{false, *amp_coeff};

    cfg.units.validate();
    return cfg;
}

AppConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw config_error("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace bjj
