#ifndef CIO_IO_HPP
#define CIO_IO_HPP

#include <cstdio>
#include <type_traits>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cio/common.hpp"
#include "cio/types.hpp"

namespace cio {

/// Round-trip-exact formatting so identical runs produce identical files.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T>
    requires std::is_integral_v<T>
inline std::string fmt(T v) {
    return std::to_string(v);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) {
    std::ofstream out(path);
    if (!out) throw Error("write_csv: cannot open " + path.string());
    for (std::size_t i = 0; i < t.header.size(); ++i)
        out << (i ? "," : "") << t.header[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw Error("write_csv: write failed for " + path.string());
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_csv: cannot open " + path.string());
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.push_back("");
        return out;
    };
    if (!std::getline(in, line)) throw Error("read_csv: empty file " + path.string());
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split(line));
    }
    return t;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Dataset CSV: one row per observation.
///  shortest_path_grid: k,split,kind,rows,cols,origin,destination,x_1..x_d
///  knapsack:           k,split,kind,d,budget,w_1..w_d,x_1..x_d
inline void write_observations_csv(const std::filesystem::path& path, ProblemKind kind,
                                   const std::vector<Observation>& obs,
                                   const std::vector<std::string>& split_of) {
    CsvTable t;
    const bool sp = kind == ProblemKind::shortest_path_grid;
    std::size_t d = obs.empty() ? 0 : obs[0].decision.dim();
    if (sp) {
        t.header = {"k", "split", "kind", "rows", "cols", "origin", "destination"};
    } else {
        t.header = {"k", "split", "kind", "d", "budget"};
        for (std::size_t i = 1; i <= d; ++i) t.header.push_back("w_" + std::to_string(i));
    }
    for (std::size_t i = 1; i <= d; ++i) t.header.push_back("x_" + std::to_string(i));

    for (std::size_t k = 0; k < obs.size(); ++k) {
        std::vector<std::string> row{fmt(k), split_of[k], to_string(kind)};
        if (sp) {
            const auto& gp = std::get<GridParams>(obs[k].exo);
            row.insert(row.end(), {fmt(gp.rows), fmt(gp.cols), fmt(gp.origin),
                                   fmt(gp.destination)});
        } else {
            const auto& kp = std::get<KnapsackParams>(obs[k].exo);
            row.push_back(fmt(static_cast<int>(kp.weights.size())));
            row.push_back(fmt(kp.budget));
            for (double w : kp.weights) row.push_back(fmt(w));
        }
        for (std::size_t i = 0; i < d; ++i) row.push_back(fmt(obs[k].decision[i]));
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

inline void write_dataset_csv(const std::filesystem::path& path,
                              const DecisionDataset& ds) {
    std::vector<std::string> split_of(ds.size(), "train");
    for (std::size_t i : ds.val_indices()) split_of[i] = "val";
    write_observations_csv(path, ds.kind(), ds.observations(), split_of);
}

struct ObservationFile {
    ProblemKind kind = ProblemKind::shortest_path_grid;
    std::vector<Observation> obs;
    std::vector<std::string> split_of;
};

inline ObservationFile read_observations_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    if (t.rows.empty()) throw Error("read_dataset_csv: no observations in " + path.string());
    ObservationFile out;
    const bool sp = t.rows.front().at(2) == "shortest_path_grid";
    out.kind = sp ? ProblemKind::shortest_path_grid : ProblemKind::knapsack;
    for (const auto& row : t.rows) {
        out.split_of.push_back(row.at(1));
        std::size_t at = 3;
        ExoParams exo;
        std::size_t d;
        if (sp) {
            GridParams gp;
            gp.rows = std::stoi(row.at(at++));
            gp.cols = std::stoi(row.at(at++));
            gp.origin = std::stoi(row.at(at++));
            gp.destination = std::stoi(row.at(at++));
            d = grid_edge_count(gp.rows, gp.cols);
            exo = gp;
        } else {
            KnapsackParams kp;
            d = std::stoul(row.at(at++));
            kp.budget = std::stod(row.at(at++));
            for (std::size_t i = 0; i < d; ++i) kp.weights.push_back(std::stod(row.at(at++)));
            exo = kp;
        }
        Vec x(d);
        for (std::size_t i = 0; i < d; ++i) x[i] = std::stod(row.at(at++));
        out.obs.push_back({Decision(std::move(x)), std::move(exo)});
    }
    return out;
}

inline DecisionDataset read_dataset_csv(const std::filesystem::path& path) {
    ObservationFile f = read_observations_csv(path);
    std::vector<std::size_t> train, val;
    for (std::size_t k = 0; k < f.obs.size(); ++k) {
        if (f.split_of[k] == "val")
            val.push_back(k);
        else
            train.push_back(k);
    }
    return DecisionDataset(f.kind, std::move(f.obs), std::move(train), std::move(val));
}

/// Hidden parameter file: theta* in the first row (k = -1), then one row per
/// sample with its perceived theta_hat. Kept separate from the dataset view.
inline void write_thetas_csv(const std::filesystem::path& path,
                             const CostVector& theta_star,
                             const std::vector<CostVector>& theta_hats) {
    CsvTable t;
    t.header = {"k"};
    for (std::size_t i = 1; i <= theta_star.dim(); ++i)
        t.header.push_back("theta_" + std::to_string(i));
    auto push = [&](int k, const CostVector& v) {
        std::vector<std::string> row{fmt(k)};
        for (std::size_t i = 0; i < v.dim(); ++i) row.push_back(fmt(v[i]));
        t.rows.push_back(std::move(row));
    };
    push(-1, theta_star);
    for (std::size_t k = 0; k < theta_hats.size(); ++k)
        push(static_cast<int>(k), theta_hats[k]);
    write_csv(path, t);
}

inline std::pair<CostVector, std::vector<CostVector>> read_thetas_csv(
    const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    if (t.rows.empty()) throw Error("read_thetas_csv: empty " + path.string());
    auto parse = [&](const std::vector<std::string>& row) {
        Vec v;
        for (std::size_t i = 1; i < row.size(); ++i) v.push_back(std::stod(row[i]));
        return CostVector(std::move(v));
    };
    CostVector star = parse(t.rows.front());
    std::vector<CostVector> hats;
    for (std::size_t r = 1; r < t.rows.size(); ++r) hats.push_back(parse(t.rows[r]));
    return {std::move(star), std::move(hats)};
}

}  // namespace cio

#endif  // CIO_IO_HPP
