#include "mondrian/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mondrian {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

[[noreturn]] void csv_error(const std::string& path, std::size_t row,
                            const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(row) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Normalizer Normalizer::fit(const SampleStream& stream) {
    if (stream.samples.empty())
        throw std::invalid_argument("Normalizer::fit: need at least one sample");
    Normalizer n;
    n.min_ = n.max_ = stream.samples.front().x;
    for (const Sample& s : stream.samples)
        for (std::size_t j = 0; j < s.x.size(); ++j) {
            n.min_[j] = std::min(n.min_[j], s.x[j]);
            n.max_[j] = std::max(n.max_[j], s.x[j]);
        }
    return n;
}

std::vector<double> Normalizer::apply(std::span<const double> x) const {
    if (x.size() != min_.size())
        throw std::invalid_argument("Normalizer::apply: wrong dimension");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double range = max_[j] - min_[j];
        if (range <= 0.0) {
            out[j] = 0.5;
        } else {
            const double t = (x[j] - min_[j]) / range;
            out[j] = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
        }
    }
    return out;
}

SampleStream Normalizer::apply(const SampleStream& stream) const {
    SampleStream out;
    out.task = stream.task;
    out.samples.reserve(stream.samples.size());
    for (const Sample& s : stream.samples) out.samples.push_back({apply(s.x), s.y});
    return out;
}

nlohmann::json Normalizer::to_json() const {
    return nlohmann::json{{"min", min_}, {"max", max_}};
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
    Normalizer n;
    n.min_ = j.at("min").get<std::vector<double>>();
    n.max_ = j.at("max").get<std::vector<double>>();
    if (n.min_.size() != n.max_.size())
        throw std::invalid_argument("Normalizer::from_json: min/max size mismatch");
    return n;
}

SampleStream load_csv(const std::string& path, bool has_header, int label_column,
                      Task task) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    SampleStream stream;
    stream.task = task;
    std::string line;
    std::size_t row = 0;
    std::size_t arity = 0;
    while (std::getline(in, line)) {
        ++row;
        if (row == 1 && has_header) continue;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (arity == 0) {
            arity = fields.size();
            if (arity < 2) csv_error(path, row, "need at least one feature and a label");
        } else if (fields.size() != arity) {
            csv_error(path, row, "ragged row: expected " + std::to_string(arity) +
                                     " fields, got " + std::to_string(fields.size()));
        }
        const int label_idx =
            label_column >= 0 ? label_column : static_cast<int>(arity) - 1;
        if (label_idx >= static_cast<int>(arity))
            csv_error(path, row, "label column " + std::to_string(label_idx) +
                                     " out of range (row has " +
                                     std::to_string(arity) + " fields)");
        Sample s;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            double v = 0.0;
            try {
                std::size_t pos = 0;
                v = std::stod(fields[j], &pos);
                while (pos < fields[j].size() && std::isspace(static_cast<unsigned char>(fields[j][pos]))) ++pos;
                if (pos != fields[j].size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                csv_error(path, row, "cannot parse field " + std::to_string(j) +
                                         " ('" + fields[j] + "') as a number");
            }
            if (!std::isfinite(v)) csv_error(path, row, "non-finite value");
            if (static_cast<int>(j) == label_idx)
                s.y = v;
            else
                s.x.push_back(v);
        }
        if (task == Task::classify && s.y != 0.0 && s.y != 1.0)
            csv_error(path, row, "classification label must be 0 or 1");
        stream.samples.push_back(std::move(s));
    }
    return stream;
}

void write_csv(const SampleStream& stream, const std::string& path, bool header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.precision(17);
    if (header) {
        for (int j = 0; j < stream.dimension(); ++j) out << "f" << j << ",";
        out << "y\n";
    }
    for (const Sample& s : stream.samples) {
        for (double v : s.x) out << v << ",";
        out << s.y << "\n";
    }
}

double inverse_cell_length_bound(double lambda) {
    return lambda + 4.0 * std::exp(-lambda / 4.0);
}

double band_epsilon(double lambda) {
    return std::min(0.25, 1.0 / (4.0 * inverse_cell_length_bound(lambda)));
}

double SynthSpec::target(std::span<const double> x) const {
    switch (kind) {
        case Kind::band_classify:
            return std::abs(x[0] - 0.5) <= epsilon ? 1.0 : 0.0;
        case Kind::lipschitz_classify:
            return x[0];
        case Kind::lipschitz_regress:
            return std::sin(2.0 * kPi * x[0]);
    }
    return 0.0;
}

double SynthSpec::target_variance() const {
    switch (kind) {
        case Kind::band_classify: {
            const double p = 2.0 * epsilon;
            return p * (1.0 - p);
        }
        case Kind::lipschitz_classify:
            return 1.0 / 12.0;  // Var of x1 under Uniform[0,1]
        case Kind::lipschitz_regress:
            return 0.5;  // E[sin^2] - E[sin]^2
    }
    return 0.0;
}

SampleStream SynthSpec::generate(std::int64_t n, std::uint64_t seed,
                                 std::uint64_t stream_tag) const {
    if (kind == Kind::band_classify && !(epsilon > 0.0 && epsilon < 0.25))
        throw std::invalid_argument("synth band: epsilon must lie in (0, 1/4)");
    if (dimension < 1) throw std::invalid_argument("synth: dimension must be >= 1");
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("synth: noise sd must be >= 0");
    RandomSource rng(seed, stream_tag);
    SampleStream out;
    out.task = task();
    out.samples.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        Sample s;
        s.x.resize(static_cast<std::size_t>(dimension));
        for (double& v : s.x) v = rng.next_unit();
        switch (kind) {
            case Kind::band_classify:
                s.y = target(s.x);
                break;
            case Kind::lipschitz_classify:
                s.y = rng.sample_bernoulli(target(s.x)) ? 1.0 : 0.0;
                break;
            case Kind::lipschitz_regress:
                s.y = target(s.x) + (noise_sd > 0.0 ? rng.sample_normal(0.0, noise_sd) : 0.0);
                break;
        }
        out.samples.push_back(std::move(s));
    }
    return out;
}

SynthSpec SynthSpec::parse(const std::string& text) {
    std::stringstream ss(text);
    std::string token;
    if (!std::getline(ss, token, ','))
        throw std::invalid_argument("synth spec: empty");
    SynthSpec spec;
    if (token == "band") {
        spec.kind = Kind::band_classify;
        spec.dimension = 1;
        spec.epsilon = 0.0;  // must be given via eps= or lambda=
    } else if (token == "lipschitz-classify") {
        spec.kind = Kind::lipschitz_classify;
    } else if (token == "lipschitz-regress") {
        spec.kind = Kind::lipschitz_regress;
    } else {
        throw std::invalid_argument("synth spec: unknown kind '" + token + "'");
    }
    while (std::getline(ss, token, ',')) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("synth spec: expected key=value, got '" + token + "'");
        const std::string key = token.substr(0, eq);
        const double value = std::stod(token.substr(eq + 1));
        if (key == "d")
            spec.dimension = static_cast<int>(value);
        else if (key == "eps")
            spec.epsilon = value;
        else if (key == "lambda")
            spec.epsilon = band_epsilon(value);
        else if (key == "sigma")
            spec.noise_sd = value;
        else
            throw std::invalid_argument("synth spec: unknown key '" + key + "'");
    }
    if (spec.kind == Kind::band_classify) {
        spec.dimension = 1;
        if (!(spec.epsilon > 0.0 && spec.epsilon < 0.25))
            throw std::invalid_argument("synth spec: band needs eps in (0, 1/4) or lambda=");
    }
    return spec;
}

std::string SynthSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::band_classify:
            os << "band,eps=" << epsilon;
            break;
        case Kind::lipschitz_classify:
            os << "lipschitz-classify,d=" << dimension;
            break;
        case Kind::lipschitz_regress:
            os << "lipschitz-regress,d=" << dimension << ",sigma=" << noise_sd;
            break;
    }
    return os.str();
}

namespace {
constexpr std::uint64_t kDefaultSynthStream = 0x64617461;  // stream tag for bare helpers
}

SampleStream synth_band(double epsilon, std::int64_t n, std::uint64_t seed) {
    SynthSpec spec;
    spec.kind = SynthSpec::Kind::band_classify;
    spec.dimension = 1;
    spec.epsilon = epsilon;
    return spec.generate(n, seed, kDefaultSynthStream);
}

SampleStream synth_lipschitz_classify(int d, std::int64_t n, std::uint64_t seed) {
    SynthSpec spec;
    spec.kind = SynthSpec::Kind::lipschitz_classify;
    spec.dimension = d;
    return spec.generate(n, seed, kDefaultSynthStream);
}

SampleStream synth_lipschitz_regress(int d, std::int64_t n, std::uint64_t seed,
                                     double noise_sd) {
    SynthSpec spec;
    spec.kind = SynthSpec::Kind::lipschitz_regress;
    spec.dimension = d;
    spec.noise_sd = noise_sd;
    return spec.generate(n, seed, kDefaultSynthStream);
}

}  // namespace mondrian
