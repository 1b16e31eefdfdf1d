#include "skpca/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "skpca/config.hpp"
#include "skpca/error.hpp"

namespace skpca {

using nlohmann::json;

std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw NumericError("format_double: conversion failed");
    return std::string(buf, ptr);
}

json meta_to_json(const TrajectoryMeta& meta) {
    return json{{"format", TrajectoryMeta::kFormat},
                {"eta", meta.eta},
                {"init", to_string(meta.init)},
                {"init_seed", meta.init_seed},
                {"pair_seed", meta.pair_seed},
                {"feature_map", feature_map_to_json(meta.feature_map)},
                {"generator", spiked_spec_to_json(meta.generator, true)},
                {"bound", meta.bound},
                {"bound_policy", meta.bound_policy},
                {"steps", meta.steps},
                {"final_v_hat", meta.final_v_hat.values()},
                {"final_log_norm", meta.final_log_norm}};
}

TrajectoryMeta meta_from_json(const json& j) {
    try {
        if (!j.is_object()) throw ConfigError("expected an object");
        if (j.value("format", std::string()) != TrajectoryMeta::kFormat)
            throw ConfigError("format: expected \"" + std::string(TrajectoryMeta::kFormat) + "\"");
        TrajectoryMeta m;
        m.eta = j.at("eta").get<double>();
        m.init = parse_init_kind(j.at("init").get<std::string>());
        m.init_seed = j.at("init_seed").get<std::uint64_t>();
        m.pair_seed = j.at("pair_seed").get<std::uint64_t>();
        m.feature_map = feature_map_from_json(j.at("feature_map"));
        m.generator = spiked_spec_from_json(j.at("generator"), true);
        m.bound = j.at("bound").get<double>();
        m.bound_policy = j.at("bound_policy").get<std::string>();
        m.steps = j.at("steps").get<std::size_t>();
        m.final_v_hat = DenseVector(j.at("final_v_hat").get<std::vector<double>>());
        m.final_log_norm = j.at("final_log_norm").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("trajectory metadata: ") + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("trajectory metadata: ") + e.what());
    } catch (const Error& e) {
        throw ConfigError(std::string("trajectory metadata: ") + e.what());
    }
}

std::string trajectory_to_csv(const Trajectory& t) {
    const bool snaps = t.has_snapshots();
    const std::size_t m = t.feature_dim();
    std::string out = "step,s,phi_norm_sq,log_ratio";
    if (snaps)
        for (std::size_t k = 0; k < m; ++k) out += ",vhat_" + std::to_string(k);
    out += '\n';

    auto row = [&](std::size_t step, double s, double f, double lr, const DenseVector* v) {
        out += std::to_string(step);
        for (double x : {s, f, lr}) {
            out += ',';
            out += format_double(x);
        }
        if (v) {
            for (double x : v->values()) {
                out += ',';
                out += format_double(x);
            }
        }
        out += '\n';
    };
    row(0, 0.0, 0.0, 0.0, snaps ? &t.initial.v_hat : nullptr);
    for (const StepRecord& r : t.records)
        row(r.step, r.s, r.phi_norm_sq, r.log_ratio, snaps ? &*r.v_hat_snapshot : nullptr);
    return out;
}

namespace {

// Field-by-field reader that knows its byte offset in the whole file.
class CsvCursor {
public:
    explicit CsvCursor(std::string_view text) : text_(text) {}

    bool at_end() const { return pos_ >= text_.size(); }
    std::size_t offset() const { return pos_; }

    std::string_view field() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '\n' && text_[pos_] != '\r') ++pos_;
        return text_.substr(start, pos_ - start);
    }

    // Consumes ',' and reports true, or consumes a line ending and reports false.
    bool separator() {
        if (pos_ < text_.size() && text_[pos_] == ',') {
            ++pos_;
            return true;
        }
        if (pos_ < text_.size() && text_[pos_] == '\r') ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '\n') {
            ++pos_;
            return false;
        }
        if (pos_ >= text_.size()) return false;
        throw ParseError("unexpected character", pos_);
    }

    double number() {
        const std::size_t start = pos_;
        std::string_view f = field();
        double x = 0.0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
        if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(x))
            throw ParseError("expected a finite number, got '" + std::string(f) + "'", start);
        return x;
    }

    std::size_t integer() {
        const std::size_t start = pos_;
        std::string_view f = field();
        std::size_t x = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
        if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
            throw ParseError("expected a step index, got '" + std::string(f) + "'", start);
        return x;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Trajectory trajectory_from_csv(std::string_view text, const TrajectoryMeta& meta) {
    CsvCursor cur(text);
    const std::vector<std::string> base = {"step", "s", "phi_norm_sq", "log_ratio"};
    std::size_t columns = 0;
    std::size_t snapshot_columns = 0;
    while (true) {
        const std::size_t start = cur.offset();
        const std::string_view name = cur.field();
        const std::string expected =
            columns < base.size() ? base[columns] : "vhat_" + std::to_string(columns - base.size());
        if (name != expected) throw ParseError("header: expected column '" + expected + "'", start);
        ++columns;
        if (!cur.separator()) break;
    }
    if (columns < base.size()) throw ParseError("header: missing columns", cur.offset());
    snapshot_columns = columns - base.size();
    const std::size_t m = meta.final_v_hat.size();
    if (snapshot_columns != 0 && snapshot_columns != m)
        throw ParseError("header: " + std::to_string(snapshot_columns) + " snapshot columns but feature dimension is " +
                             std::to_string(m),
                         0);

    Trajectory t;
    t.eta = meta.eta;
    t.feature_map = meta.feature_map;
    t.init = meta.init;

    std::size_t row = 0;
    while (!cur.at_end()) {
        const std::size_t row_start = cur.offset();
        StepRecord r;
        r.step = cur.integer();
        if (r.step != row) throw ParseError("expected step " + std::to_string(row), row_start);
        double* scalars[] = {&r.s, &r.phi_norm_sq, &r.log_ratio};
        for (double* x : scalars) {
            if (!cur.separator()) throw ParseError("row ends early", cur.offset());
            *x = cur.number();
        }
        std::vector<double> snap;
        snap.reserve(snapshot_columns);
        for (std::size_t k = 0; k < snapshot_columns; ++k) {
            if (!cur.separator()) throw ParseError("row ends early", cur.offset());
            snap.push_back(cur.number());
        }
        if (cur.separator()) throw ParseError("row has too many fields", cur.offset() - 1);

        if (row == 0) {
            if (r.s != 0.0 || r.phi_norm_sq != 0.0 || r.log_ratio != 0.0)
                throw ParseError("initial row must carry zero scalars", row_start);
            t.initial.v_hat = snapshot_columns ? DenseVector(std::move(snap)) : DenseVector{};
        } else {
            if (snapshot_columns) r.v_hat_snapshot = DenseVector(std::move(snap));
            t.records.push_back(std::move(r));
        }
        ++row;
    }
    if (row == 0) throw ParseError("missing initial row", cur.offset());
    if (t.records.size() != meta.steps) {
        throw ParseError("expected " + std::to_string(meta.steps) + " steps, found " + std::to_string(t.records.size()),
                         cur.offset());
    }
    t.final_state = {meta.final_v_hat, meta.final_log_norm, meta.steps};
    return t;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace skpca
