#include "sqtom/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sqtom/errors.hpp"
#include "sqtom/numerics.hpp"
#include "sqtom/rng.hpp"

namespace sqtom {

namespace io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_meta_comments(std::ostream& os, const Metadata& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
}

Metadata read_meta_comments(std::istream& is, std::string& first_data_line) {
    Metadata meta;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] != '#') {
            first_data_line = line;
            return meta;
        }
        std::size_t start = line.find_first_not_of("# \t");
        if (start == std::string::npos) continue;
        std::size_t eq = line.find('=', start);
        if (eq == std::string::npos) continue;
        meta.emplace_back(line.substr(start, eq - start), line.substr(eq + 1));
    }
    first_data_line.clear();
    return meta;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string meta_json(const Metadata& meta) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : meta) {
        if (!first) out += ", ";
        first = false;
        out += "\"" + json_escape(k) + "\": \"" + json_escape(v) + "\"";
    }
    out += "}";
    return out;
}

}  // namespace io

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open for reading: " + path);
    return is;
}

std::string histogram_json(const QuadratureHistogram& hist, const Metadata& meta) {
    std::string out = "{\"theta\": " + io::format_double(hist.theta.theta);
    out += ", \"interior_edges\": [";
    for (std::size_t i = 0; i < hist.interior_edges.size(); ++i) {
        if (i) out += ", ";
        out += io::format_double(hist.interior_edges[i]);
    }
    out += "], \"counts\": [";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(hist.counts[i]);
    }
    out += "]";
    if (!meta.empty()) out += ", \"meta\": " + io::meta_json(meta);
    out += "}";
    return out;
}

QuadratureHistogram histogram_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw InputError(where + ": expected a JSON object");
    if (!j.contains("theta"))
        throw InputError(where + ": schema error: missing \"theta\" field");
    if (!j.contains("interior_edges"))
        throw InputError(where + ": schema error: missing \"interior_edges\" field");
    if (!j.contains("counts"))
        throw InputError(where + ": schema error: missing \"counts\" field");
    QuadratureHistogram hist;
    try {
        hist.theta.theta = j.at("theta").get<double>();
        hist.interior_edges = j.at("interior_edges").get<std::vector<double>>();
        hist.counts = j.at("counts").get<std::vector<std::int64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(where + ": schema error: " + e.what());
    }
    hist.validate();
    return hist;
}

nlohmann::json parse_json_file(const std::string& path) {
    auto is = open_in(path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw InputError("malformed JSON in " + path);
    return j;
}

}  // namespace

void SampleSet::validate() const {
    if (samples.empty()) throw InputError("SampleSet: no samples");
    for (double s : samples) {
        if (!std::isfinite(s)) throw InputError("SampleSet: non-finite sample value");
    }
}

std::int64_t QuadratureHistogram::total() const {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

void QuadratureHistogram::validate() const {
    for (std::size_t l = 0; l + 1 < interior_edges.size(); ++l) {
        if (!(interior_edges[l] < interior_edges[l + 1]))
            throw InputError("histogram: interior_edges not strictly increasing at index " +
                             std::to_string(l));
    }
    for (double e : interior_edges) {
        if (!std::isfinite(e)) throw InputError("histogram: non-finite bin edge");
    }
    if (counts.size() != interior_edges.size() + 1)
        throw InputError("histogram: counts length must equal interior_edges length + 1 (got " +
                         std::to_string(counts.size()) + " vs " +
                         std::to_string(interior_edges.size()) + " edges)");
    for (auto c : counts) {
        if (c < 0) throw InputError("histogram: negative count");
    }
}

std::int64_t Dataset::total_counts() const {
    std::int64_t n = 0;
    for (const auto& h : histograms) n += h.total();
    return n;
}

void Dataset::validate() const {
    for (const auto& h : histograms) h.validate();
    for (std::size_t i = 0; i < histograms.size(); ++i) {
        for (std::size_t j = i + 1; j < histograms.size(); ++j) {
            double d = std::abs(histograms[i].theta.canonical() - histograms[j].theta.canonical());
            d = std::min(d, kPi - d);
            if (d <= 1e-12)
                throw InputError("dataset: duplicate measurement setting (theta values equal "
                                 "mod pi)");
        }
    }
}

SampleSet simulate_samples(const StateParams& params, PhaseQuadrature theta, std::size_t n,
                           std::uint64_t seed) {
    params.require_physical();
    if (n < 1) throw InputError("simulate_samples: n must be >= 1");

    const double phase_sd = std::sqrt(params.v_phi);
    Rng rng(seed);
    SampleSet set;
    set.theta = theta;
    set.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = phase_sd * draw_normal(rng);
        const double sd = std::sqrt(rotated_variance(params, u + theta.theta));
        set.samples[i] = sd * draw_normal(rng);
    }
    return set;
}

QuadratureHistogram bin_samples(const SampleSet& set, int num_bins) {
    set.validate();
    if (num_bins < 2) throw InputError("bin_samples: need at least 2 bins");

    double mean = 0.0;
    for (double s : set.samples) mean += s;
    mean /= double(set.samples.size());
    double ss = 0.0;
    for (double s : set.samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / double(set.samples.size() > 1 ? set.samples.size() - 1 : 1));
    if (sd <= 0.0) throw InputError("bin_samples: degenerate sample set (zero variance)");

    const double lo = -kSpanSigmas * sd;
    const double hi = kSpanSigmas * sd;
    std::vector<double> edges(num_bins - 1);
    if (num_bins == 2) {
        edges[0] = 0.5 * (lo + hi);
    } else {
        for (int l = 0; l < num_bins - 1; ++l)
            edges[l] = lo + (hi - lo) * double(l) / double(num_bins - 2);
    }
    return bin_samples(set, edges);
}

QuadratureHistogram bin_samples(const SampleSet& set, std::span<const double> interior_edges) {
    set.validate();
    QuadratureHistogram hist;
    hist.theta = set.theta;
    hist.interior_edges.assign(interior_edges.begin(), interior_edges.end());
    hist.counts.assign(interior_edges.size() + 1, 0);
    hist.validate();
    for (double s : set.samples) {
        const auto it = std::upper_bound(hist.interior_edges.begin(), hist.interior_edges.end(), s);
        // upper_bound -> number of edges <= s, so edge ties go to the upper bin
        ++hist.counts[std::size_t(it - hist.interior_edges.begin())];
    }
    return hist;
}

void save_samples(const std::vector<SampleSet>& sets, const std::string& path,
                  const Metadata& meta) {
    auto os = open_out(path);
    io::write_meta_comments(os, meta);
    os << "theta_radians,value\n";
    for (const auto& set : sets) {
        const std::string theta_str = io::format_double(set.theta.theta);
        for (double s : set.samples) os << theta_str << "," << io::format_double(s) << "\n";
    }
    if (!os) throw InputError("write failed: " + path);
}

std::vector<SampleSet> load_samples(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    io::read_meta_comments(is, line);
    if (line != "theta_radians,value")
        throw InputError(path + ": expected samples CSV header \"theta_radians,value\"");

    std::vector<SampleSet> sets;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw InputError(path + ": malformed row " + std::to_string(row));
        double theta, value;
        try {
            theta = std::stod(line.substr(0, comma));
            value = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw InputError(path + ": malformed number at row " + std::to_string(row));
        }
        auto it = std::find_if(sets.begin(), sets.end(),
                               [&](const SampleSet& s) { return s.theta.theta == theta; });
        if (it == sets.end()) {
            sets.push_back({{theta}, {}});
            it = sets.end() - 1;
        }
        it->samples.push_back(value);
    }
    if (sets.empty()) throw InputError(path + ": no samples");
    for (const auto& s : sets) s.validate();
    return sets;
}

void save_histogram(const QuadratureHistogram& hist, const std::string& path,
                    const Metadata& meta) {
    hist.validate();
    auto os = open_out(path);
    os << histogram_json(hist, meta) << "\n";
    if (!os) throw InputError("write failed: " + path);
}

QuadratureHistogram load_histogram(const std::string& path) {
    return histogram_from_json(parse_json_file(path), path);
}

void save_dataset(const Dataset& dataset, const std::string& path, const Metadata& meta) {
    dataset.validate();
    auto os = open_out(path);
    os << "[\n";
    for (std::size_t i = 0; i < dataset.histograms.size(); ++i) {
        os << "  " << histogram_json(dataset.histograms[i], meta);
        if (i + 1 < dataset.histograms.size()) os << ",";
        os << "\n";
    }
    os << "]\n";
    if (!os) throw InputError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    const auto j = parse_json_file(path);
    if (!j.is_array()) throw InputError(path + ": dataset file must be a JSON array");
    Dataset dataset;
    for (std::size_t i = 0; i < j.size(); ++i)
        dataset.histograms.push_back(
            histogram_from_json(j[i], path + "[" + std::to_string(i) + "]"));
    dataset.validate();
    return dataset;
}

}  // namespace sqtom
