#include "deconv/cli/formats.hpp"

#include "deconv/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace deconv::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

std::vector<double> number_array(const Json& doc, const std::string& key) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
        throw DomainError("coefficient document is missing array '" + key + "'");
    }
    std::vector<double> out;
    for (const auto& v : doc.at(key)) {
        if (!v.is_number()) {
            throw DomainError("coefficient document array '" + key + "' holds a non-number");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

DataFile parse_data(const std::string& content, const std::string& source) {
    DataFile out;
    std::istringstream in(content);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        double v = 0.0;
        const char* first = body.data();
        const char* last = body.data() + body.size();
        if (*first == '+') {
            ++first;
        }
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            std::ostringstream os;
            os << source << ": line " << number << ": cannot parse '" << body << "' as a number";
            throw DataError(os.str());
        }
        out.values.push_back(v);
        out.lines.push_back(number);
    }
    return out;
}

DataFile read_data_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open data file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_data(buf.str(), path);
}

void check_support(const DataFile& data, const nullmodel::NullSpec& null) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < data.values.size(); ++i) {
        if (!null.basis->in_support(data.values[i])) {
            bad.push_back(data.lines[i]);
        }
    }
    if (bad.empty()) {
        return;
    }
    std::ostringstream os;
    os << bad.size() << " observation(s) outside the support of " << measures::to_string(null.ref);
    if (null.ref.kind == measures::ReferenceKind::Geometric) {
        os << " (nonnegative integers required)";
    }
    os << " on line(s)";
    const std::size_t shown = std::min<std::size_t>(bad.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        os << (i == 0 ? " " : ", ") << bad[i];
    }
    if (shown < bad.size()) {
        os << ", ...";
    }
    throw DataError(os.str());
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) {
        throw NumericalError("cannot format number");
    }
    return std::string(buf, ptr);
}

Json coefficients_to_json(const nullmodel::NullCoefficients& coeffs, const NullConfig& null, double condition_cap) {
    const auto diag = nullmodel::eigen_floor_diagnostics(coeffs, condition_cap);
    std::vector<double> sigma;
    sigma.reserve(static_cast<std::size_t>(coeffs.k * coeffs.k));
    for (int i = 0; i < coeffs.k; ++i) {
        for (int j = 0; j < coeffs.k; ++j) {
            sigma.push_back(coeffs.sigma(i, j));
        }
    }
    Json cond = Json::array();
    for (const double c : diag.condition) {
        cond.push_back(std::isfinite(c) ? Json(c) : Json("inf"));
    }
    return Json{{"format", kCoefficientFormat},
                {"version", kCoefficientVersion},
                {"null_hash", null_hash(null)},
                {"null", null_to_json(null)},
                {"k", coeffs.k},
                {"method", nullmodel::to_string(coeffs.method)},
                {"alphas", vector_json(coeffs.alphas)},
                {"sigma", sigma},
                {"lambda_min", diag.lambda_min},
                {"condition", cond},
                {"condition_cap", condition_cap},
                {"usable_k", diag.usable_k},
                {"min_eigen", coeffs.min_eigen},
                {"psd_clip", coeffs.psd_clip},
                {"provenance", coeffs.provenance}};
}

nullmodel::NullCoefficients coefficients_from_json(const Json& doc, const NullConfig& null) {
    if (!doc.is_object() || doc.value("format", std::string()) != kCoefficientFormat) {
        throw DomainError("not a coefficient document");
    }
    if (doc.value("version", 0) != kCoefficientVersion) {
        throw DomainError("unsupported coefficient document version");
    }
    const std::string expected = null_hash(null);
    const std::string found = doc.value("null_hash", std::string());
    if (found != expected) {
        throw DomainError("stale coefficient cache: it was computed for null " + found + ", configuration is " +
                          expected);
    }
    if (!doc.contains("k") || !doc.at("k").is_number_integer() || doc.at("k").get<int>() < 1) {
        throw DomainError("coefficient document has no valid 'k'");
    }
    const int k = doc.at("k").get<int>();
    const auto alphas = number_array(doc, "alphas");
    const auto sigma = number_array(doc, "sigma");
    if (alphas.size() != static_cast<std::size_t>(k) || sigma.size() != static_cast<std::size_t>(k * k)) {
        throw DomainError("coefficient document arrays do not match k");
    }
    nullmodel::NullMoments m;
    m.k = k;
    m.alphas = Eigen::Map<const Eigen::VectorXd>(alphas.data(), k);
    m.second.resize(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            m.second(i, j) = sigma[static_cast<std::size_t>(i * k + j)];
        }
    }
    nullmodel::NullCoefficients c;
    c.k = k;
    c.alphas = m.alphas;
    c.sigma = m.second;
    const std::string method = doc.value("method", std::string());
    if (method == "closed_form") {
        c.method = nullmodel::Method::ClosedForm;
    } else if (method == "quadrature") {
        c.method = nullmodel::Method::Quadrature;
    } else if (method == "monte_carlo") {
        c.method = nullmodel::Method::MonteCarlo;
    } else {
        throw DomainError("coefficient document has unknown method '" + method + "'");
    }
    c.provenance = doc.value("provenance", std::string());
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < i; ++j) {
            if (c.sigma(i, j) != c.sigma(j, i)) {
                throw DomainError("coefficient document sigma is not symmetric");
            }
        }
    }
    // Re-derive the eigen summary rather than trusting the file.
    const auto lead = c.leading(k);
    c.min_eigen = lead.min_eigen;
    c.psd_clip = lead.psd_clip;
    if (c.min_eigen < -nullmodel::kPsdSlack) {
        throw NumericalError("coefficient document sigma is not positive semidefinite");
    }
    return c;
}

Json result_to_json(const teststat::TestResult& r) {
    return Json{{"n", r.n},
                {"t_sequence", r.t_sequence},
                {"s_n", r.s_n},
                {"t_stat", r.t_stat},
                {"critical_value", r.critical_value},
                {"p_value", r.p_value},
                {"reject", r.reject},
                {"lambdas", r.lambdas},
                {"used_kmax", r.used_kmax},
                {"retained_rank", r.retained_rank},
                {"calibration", teststat::to_string(r.calibration)}};
}

std::string simulation_csv(const std::vector<simlab::SimReport>& reports, bool timing) {
    std::string out = kSimulationCsvHeader;
    out += '\n';
    for (const auto& r : reports) {
        out += r.scenario;
        out += ',' + std::to_string(r.n);
        out += ',' + std::to_string(r.reps);
        out += ',' + format_double(r.rejection_rate);
        out += ',' + format_double(r.wilson95.low);
        out += ',' + format_double(r.wilson95.high);
        out += ',';
        if (timing) {
            out += format_double(r.seconds);
        }
        out += '\n';
    }
    return out;
}

Json simulation_json(const std::vector<simlab::SimReport>& reports, const Json& config_echo, bool timing) {
    Json rows = Json::array();
    for (const auto& r : reports) {
        Json row{{"scenario", r.scenario},
                 {"n", r.n},
                 {"reps", r.reps},
                 {"rejections", r.rejections},
                 {"errors", r.errors},
                 {"reject_rate", r.rejection_rate},
                 {"ci_low", r.wilson95.low},
                 {"ci_high", r.wilson95.high},
                 {"critical_value", r.critical_value},
                 {"kmax", r.kmax},
                 {"order_counts", r.order_counts},
                 {"chi2_exceedances", r.chi2_exceedances}};
        row["seconds"] = timing ? Json(r.seconds) : Json(nullptr);
        rows.push_back(row);
    }
    return Json{{"rows", rows}, {"config", config_echo}};
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DomainError("cannot write " + path);
    }
    out << content;
    if (!out) {
        throw DomainError("failed writing " + path);
    }
}

}  // namespace deconv::cli
