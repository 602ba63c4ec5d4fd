#include "hybridfpca/io.hpp"

#include "hybridfpca/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hybridfpca {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::InvalidData, "CSV is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return out;
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        // from_chars rejects "nan"/"inf" spellings produced by printf on some platforms.
        if (text == "nan" || text == "NaN" || text == "-nan") return std::numeric_limits<double>::quiet_NaN();
        fail(ErrorKind::InvalidData, path.string() + ":" + std::to_string(line) + ": not a number: '" + text + "'");
    }
    return v;
}

std::string label_or_index(const std::vector<std::string>& labels, int i) {
    return labels.empty() ? std::to_string(i) : labels.at(i);
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
    const std::string text = read_text(path);
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (number == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            fail(ErrorKind::InvalidData, path.string() + ":" + std::to_string(number) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) fail(ErrorKind::InvalidData, path.string() + ": missing header");
    return table;
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t k = 0; k < end; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        fail(ErrorKind::InvalidConfig, source + ": malformed JSON at line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": " + e.what());
    }
}

json read_json(const fs::path& path) { return parse_json(read_text(path), path.string()); }

LabeledTensor read_tensor_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const auto ci = t.column("subject"), cr = t.column("region"), cw = t.column("omega"), cs = t.column("s"),
               cv = t.column("value");
    std::vector<std::string> subjects, regions;
    std::map<std::string, int> subject_id, region_id;
    std::set<double> omega_set, s_set;
    struct Row {
        int i, r;
        double w, s, v;
    };
    std::vector<Row> rows;
    rows.reserve(t.rows.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& f = t.rows[k];
        const std::size_t line = k + 2;
        auto [si, new_s] = subject_id.try_emplace(f[ci], static_cast<int>(subjects.size()));
        if (new_s) subjects.push_back(f[ci]);
        auto [ri, new_r] = region_id.try_emplace(f[cr], static_cast<int>(regions.size()));
        if (new_r) regions.push_back(f[cr]);
        Row row{si->second, ri->second, parse_double(f[cw], path, line), parse_double(f[cs], path, line),
                parse_double(f[cv], path, line)};
        omega_set.insert(row.w);
        s_set.insert(row.s);
        rows.push_back(row);
    }
    if (rows.empty()) fail(ErrorKind::InvalidData, path.string() + ": no data rows");
    const std::vector<double> omega(omega_set.begin(), omega_set.end());
    const std::vector<double> s(s_set.begin(), s_set.end());
    const int n = static_cast<int>(subjects.size()), R = static_cast<int>(regions.size());
    const int W = static_cast<int>(omega.size()), S = static_cast<int>(s.size());

    auto locate = [](const std::vector<double>& grid, double x) {
        return static_cast<int>(std::lower_bound(grid.begin(), grid.end(), x) - grid.begin());
    };
    std::vector<double> values(static_cast<std::size_t>(n) * R * W * S, 0.0);
    std::vector<char> seen(values.size(), 0);
    std::vector<int> slice_count(static_cast<std::size_t>(n) * W, 0);
    for (const auto& row : rows) {
        const int w = locate(omega, row.w), m = locate(s, row.s);
        const std::size_t at = ((static_cast<std::size_t>(row.i) * R + row.r) * W + w) * S + m;
        if (seen[at]) {
            fail(ErrorKind::InvalidData, path.string() + ": duplicate entry for subject " + subjects[row.i] +
                                             ", region " + regions[row.r] + ", omega " + format_double(row.w) +
                                             ", s " + format_double(row.s));
        }
        seen[at] = 1;
        values[at] = row.v;
        ++slice_count[static_cast<std::size_t>(row.i) * W + w];
    }
    bool any_missing = false;
    Mask mask = Mask::Constant(n, W, true);
    for (int i = 0; i < n; ++i) {
        for (int w = 0; w < W; ++w) {
            const int c = slice_count[static_cast<std::size_t>(i) * W + w];
            if (c == 0) {
                mask(i, w) = false;
                any_missing = true;
            } else if (c != R * S) {
                fail(ErrorKind::InvalidData, path.string() + ": subject " + subjects[i] + " at omega " +
                                                 format_double(omega[w]) + " has " + std::to_string(c) + " of " +
                                                 std::to_string(R * S) + " (region, s) entries");
            }
        }
    }
    if (W < 2 || S < 2) fail(ErrorKind::InvalidGrid, path.string() + ": omega and s need at least 2 distinct values");
    return LabeledTensor{HybridTensor(n, R, Grid1D::trapezoid(omega), Grid1D::trapezoid(s), std::move(values),
                                      any_missing ? std::optional<Mask>(mask) : std::nullopt),
                         std::move(subjects), std::move(regions)};
}

std::string format_tensor_csv(const HybridTensor& tensor, const std::vector<std::string>& subjects,
                              const std::vector<std::string>& regions) {
    std::string out = "subject,region,omega,s,value\n";
    const auto& wp = tensor.omega_grid().points();
    const auto& sp = tensor.s_grid().points();
    for (int i = 0; i < tensor.subjects(); ++i) {
        const std::string si = label_or_index(subjects, i);
        for (int r = 0; r < tensor.regions(); ++r) {
            const std::string ri = label_or_index(regions, r);
            for (int w = 0; w < tensor.omega_size(); ++w) {
                if (!tensor.observed(i, w)) continue;
                for (int m = 0; m < tensor.s_size(); ++m) {
                    out += si + ',' + ri + ',' + format_double(wp[w]) + ',' + format_double(sp[m]) + ',' +
                           format_double(tensor(i, r, w, m)) + '\n';
                }
            }
        }
    }
    return out;
}

void write_tensor_csv(const fs::path& path, const HybridTensor& tensor, const std::vector<std::string>& subjects,
                      const std::vector<std::string>& regions) {
    write_text(path, format_tensor_csv(tensor, subjects, regions));
}

LabeledSample read_sample_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const auto ci = t.column("subject"), cs = t.column("s"), cv = t.column("value");
    std::vector<std::string> subjects;
    std::map<std::string, int> subject_id;
    std::set<double> grid_set;
    std::vector<std::tuple<int, double, double>> rows;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& f = t.rows[k];
        auto [it, inserted] = subject_id.try_emplace(f[ci], static_cast<int>(subjects.size()));
        if (inserted) subjects.push_back(f[ci]);
        const double s = parse_double(f[cs], path, k + 2);
        grid_set.insert(s);
        rows.emplace_back(it->second, s, parse_double(f[cv], path, k + 2));
    }
    if (rows.empty()) fail(ErrorKind::InvalidData, path.string() + ": no data rows");
    const std::vector<double> grid(grid_set.begin(), grid_set.end());
    const auto n = static_cast<Eigen::Index>(subjects.size());
    const auto G = static_cast<Eigen::Index>(grid.size());
    Matrix curves = Matrix::Zero(n, G);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, G, false);
    for (const auto& [i, s, v] : rows) {
        const auto m = std::lower_bound(grid.begin(), grid.end(), s) - grid.begin();
        if (seen(i, m)) {
            fail(ErrorKind::InvalidData, path.string() + ": duplicate entry for subject " + subjects[i] + " at s " +
                                             format_double(s));
        }
        seen(i, m) = true;
        curves(i, m) = v;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!seen.row(i).all()) {
            fail(ErrorKind::InvalidData, path.string() + ": subject " + subjects[i] + " does not cover the full grid");
        }
    }
    if (!curves.allFinite()) fail(ErrorKind::InvalidData, path.string() + ": non-finite values");
    return LabeledSample{FunctionalSample(std::move(curves), Grid1D::trapezoid(grid)), std::move(subjects)};
}

std::string format_sample_csv(const FunctionalSample& sample, const std::vector<std::string>& subjects) {
    std::string out = "subject,s,value\n";
    const auto& pts = sample.grid().points();
    for (int i = 0; i < sample.subjects(); ++i) {
        const std::string si = label_or_index(subjects, i);
        for (int m = 0; m < sample.grid_size(); ++m) {
            out += si + ',' + format_double(pts[m]) + ',' + format_double(sample.curves()(i, m)) + '\n';
        }
    }
    return out;
}

void write_sample_csv(const fs::path& path, const FunctionalSample& sample, const std::vector<std::string>& subjects) {
    write_text(path, format_sample_csv(sample, subjects));
}

FunctionalSample align_subjects(const LabeledSample& sample, const std::vector<std::string>& subjects,
                                const std::string& what) {
    std::map<std::string, int> position;
    for (std::size_t k = 0; k < sample.subjects.size(); ++k) position[sample.subjects[k]] = static_cast<int>(k);
    std::set<std::string> wanted(subjects.begin(), subjects.end());
    std::string extra;
    for (const auto& s : sample.subjects) {
        if (!wanted.count(s)) extra += (extra.empty() ? "" : ", ") + ("'" + s + "'");
    }
    std::vector<int> order;
    order.reserve(subjects.size());
    for (const auto& s : subjects) {
        const auto it = position.find(s);
        if (it == position.end()) {
            fail(ErrorKind::Shape, what + " has no curve for subject '" + s + "'" +
                                       (extra.empty() ? "" : "; unexpected subjects: " + extra));
        }
        order.push_back(it->second);
    }
    if (sample.subjects.size() != subjects.size()) {
        fail(ErrorKind::Shape, what + " has " + std::to_string(sample.subjects.size()) + " subjects; expected " +
                                   std::to_string(subjects.size()));
    }
    return sample.sample.select_subjects(order);
}

void write_matrix_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& m) {
    if (header.size() != static_cast<std::size_t>(m.cols())) fail(ErrorKind::Shape, "matrix header width mismatch");
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
    out += '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? "," : "") + format_double(m(r, c));
        out += '\n';
    }
    write_text(path, out);
}

Matrix read_matrix_csv(const fs::path& path, std::vector<std::string>* header) {
    const CsvTable t = read_csv(path);
    Matrix m(t.rows.size(), t.header.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.header.size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(t.rows[r][c], path, r + 2);
    if (header) *header = t.header;
    return m;
}

namespace {

std::vector<std::string> numbered(const std::string& first, const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> h;
    if (!first.empty()) h.push_back(first);
    for (Eigen::Index c = 0; c < count; ++c) h.push_back(prefix + std::to_string(c + 1));
    return h;
}

Matrix with_leading_column(const std::vector<double>& first, const Matrix& rest) {
    Matrix m(rest.rows(), rest.cols() + 1);
    m.col(0) = Eigen::Map<const Vector>(first.data(), static_cast<Eigen::Index>(first.size()));
    m.rightCols(rest.cols()) = rest;
    return m;
}

std::vector<double> column_vector(const Matrix& m, Eigen::Index c) {
    return {m.col(c).data(), m.col(c).data() + m.rows()};
}

void check_manifest(const json& j, const std::string& kind, const fs::path& dir) {
    if (j.value("kind", std::string{}) != kind) fail(ErrorKind::InvalidData, dir.string() + " does not hold a " + kind);
    if (j.value("format_version", 0) != kFormatVersion) {
        fail(ErrorKind::InvalidData, dir.string() + ": unsupported format_version");
    }
}

const char* basis_name(Dimension d) {
    switch (d) {
        case Dimension::Region: return "region";
        case Dimension::Omega: return "omega";
        case Dimension::S: return "s";
    }
    return "?";
}

void write_basis(const fs::path& dir, const MarginalBasis& b, const std::vector<double>& points) {
    const std::string name = basis_name(b.dimension);
    write_matrix_csv(dir / ("basis_" + name + ".csv"), numbered(name, "v", b.vectors.cols()),
                     with_leading_column(points, b.vectors));
    Matrix ev(b.eigenvalues.size(), 2);
    ev.col(0) = b.eigenvalues;
    ev.col(1) = b.fve;
    write_matrix_csv(dir / ("eigenvalues_" + name + ".csv"), {"eigenvalue", "fve"}, ev);
}

MarginalBasis read_basis(const fs::path& dir, Dimension d, std::vector<double>* points) {
    const std::string name = basis_name(d);
    MarginalBasis b;
    b.dimension = d;
    const Matrix m = read_matrix_csv(dir / ("basis_" + name + ".csv"));
    if (m.cols() < 2) fail(ErrorKind::InvalidData, "basis_" + name + ".csv has no components");
    b.vectors = m.rightCols(m.cols() - 1);
    if (points) *points = column_vector(m, 0);
    const Matrix ev = read_matrix_csv(dir / ("eigenvalues_" + name + ".csv"));
    b.eigenvalues = ev.col(0);
    b.fve = ev.col(1);
    return b;
}

}  // namespace

void write_hpca_model(const fs::path& dir, const HpcaModel& model) {
    fs::create_directories(dir);
    const int R = model.regions, W = model.omega_grid.size(), S = model.s_grid.size();
    std::vector<double> regions(R);
    for (int r = 0; r < R; ++r) regions[r] = r;
    write_basis(dir, model.basis_region, regions);
    write_basis(dir, model.basis_omega, model.omega_grid.points());
    write_basis(dir, model.basis_s, model.s_grid.points());

    Matrix mean(static_cast<Eigen::Index>(R) * W * S, 4);
    for (int r = 0, row = 0; r < R; ++r)
        for (int w = 0; w < W; ++w)
            for (int m = 0; m < S; ++m, ++row) {
                mean(row, 0) = r;
                mean(row, 1) = model.omega_grid.points()[w];
                mean(row, 2) = model.s_grid.points()[m];
                mean(row, 3) = model.mean[row];
            }
    write_matrix_csv(dir / "mean.csv", {"region", "omega", "s", "value"}, mean);
    write_matrix_csv(dir / "scores.csv", numbered("", "c", model.scores.cols()), model.scores);

    Matrix ranking(model.components(), 5);
    for (int c = 0; c < model.components(); ++c) {
        ranking(c, 0) = c + 1;
        ranking(c, 1) = model.ranking[c].k + 1;
        ranking(c, 2) = model.ranking[c].l + 1;
        ranking(c, 3) = model.ranking[c].m + 1;
        ranking(c, 4) = model.score_variance[c];
    }
    write_matrix_csv(dir / "ranking.csv", {"rank", "k", "l", "m", "variance"}, ranking);

    json manifest = {
        {"kind", "hpca_model"},
        {"format_version", kFormatVersion},
        {"subjects", model.subjects()},
        {"regions", R},
        {"omega_points", W},
        {"s_points", S},
        {"K", model.K()},
        {"L", model.L()},
        {"M", model.M()},
        {"fve_target", model.fve_target},
        {"ranking_order", model.order == RankingOrder::Variance ? "variance" : "lexicographic"},
    };
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

HpcaModel read_hpca_model(const fs::path& dir) {
    const json manifest = read_json(dir / "manifest.json");
    check_manifest(manifest, "hpca_model", dir);
    std::vector<double> omega_points, s_points;
    MarginalBasis region = read_basis(dir, Dimension::Region, nullptr);
    MarginalBasis omega = read_basis(dir, Dimension::Omega, &omega_points);
    MarginalBasis s = read_basis(dir, Dimension::S, &s_points);
    HpcaModel model{Grid1D::trapezoid(omega_points), Grid1D::trapezoid(s_points)};
    model.regions = manifest.at("regions").get<int>();
    model.basis_region = std::move(region);
    model.basis_omega = std::move(omega);
    model.basis_s = std::move(s);
    model.fve_target = manifest.at("fve_target").get<double>();
    model.order = manifest.at("ranking_order").get<std::string>() == "lexicographic" ? RankingOrder::Lexicographic
                                                                                      : RankingOrder::Variance;
    const Matrix mean = read_matrix_csv(dir / "mean.csv");
    model.mean = column_vector(mean, 3);
    model.scores = read_matrix_csv(dir / "scores.csv");
    const Matrix ranking = read_matrix_csv(dir / "ranking.csv");
    for (Eigen::Index c = 0; c < ranking.rows(); ++c) {
        model.ranking.push_back(Triplet{static_cast<int>(ranking(c, 1)) - 1, static_cast<int>(ranking(c, 2)) - 1,
                                        static_cast<int>(ranking(c, 3)) - 1});
        model.score_variance.push_back(ranking(c, 4));
    }
    const std::size_t cells = static_cast<std::size_t>(model.regions) * model.omega_grid.size() * model.s_grid.size();
    if (model.mean.size() != cells || model.basis_region.vectors.rows() != model.regions ||
        model.scores.cols() != static_cast<Eigen::Index>(model.ranking.size()) ||
        model.scores.rows() != manifest.at("subjects").get<int>()) {
        fail(ErrorKind::InvalidData, dir.string() + ": model files disagree with the manifest extents");
    }
    for (const auto& t : model.ranking) {
        if (t.k < 0 || t.k >= model.K() || t.l < 0 || t.l >= model.L() || t.m < 0 || t.m >= model.M()) {
            fail(ErrorKind::InvalidData, dir.string() + ": ranking refers to a missing component");
        }
    }
    return model;
}

void write_fof_model(const fs::path& dir, const FofModel& model) {
    fs::create_directories(dir);
    Matrix intercept(model.s_grid.size(), 3);
    intercept.col(0) = Eigen::Map<const Vector>(model.s_grid.points().data(), model.s_grid.size());
    intercept.col(1) = model.intercept;
    intercept.col(2) = model.response_mean;
    write_matrix_csv(dir / "intercept.csv", {"s", "intercept", "response_mean"}, intercept);
    write_matrix_csv(dir / "regression_weights.csv", numbered("", "b", model.regression_weights.cols()),
                     model.regression_weights);
    json preds = json::array();
    for (int j = 0; j < model.predictors(); ++j) {
        const std::string tag = std::to_string(j + 1);
        write_matrix_csv(dir / ("coefficients_" + tag + ".csv"), numbered("", "s_basis", model.coefficients[j].cols()),
                         model.coefficients[j]);
        const auto& c = model.compression[j];
        write_matrix_csv(dir / ("compression_" + tag + ".csv"), numbered("", "d", c.directions.cols()), c.directions);
        write_matrix_csv(dir / ("predictor_mean_" + tag + ".csv"), {"g", "value"},
                         with_leading_column(model.g_grid.points(), c.mean));
        preds.push_back({{"components", c.directions.cols()},
                         {"eigenvalues", std::vector<double>(c.eigenvalues.data(),
                                                             c.eigenvalues.data() + c.eigenvalues.size())}});
    }
    json manifest = {
        {"kind", "fof_model"},
        {"format_version", kFormatVersion},
        {"predictors", model.predictors()},
        {"n_basis_g", model.basis_g.size()},
        {"n_basis_s", model.basis_s.size()},
        {"g_grid", model.g_grid.points()},
        {"s_grid", model.s_grid.points()},
        {"chosen_penalty", model.chosen_penalty},
        {"train_mspe", model.train_mspe},
        {"penalty_grid", model.penalty_grid},
        {"gcv_trace", model.gcv_trace},
        {"compression", preds},
    };
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

FofModel read_fof_model(const fs::path& dir) {
    const json manifest = read_json(dir / "manifest.json");
    check_manifest(manifest, "fof_model", dir);
    const Grid1D g = Grid1D::trapezoid(manifest.at("g_grid").get<std::vector<double>>());
    const Grid1D s = Grid1D::trapezoid(manifest.at("s_grid").get<std::vector<double>>());
    FofModel model{g, s, BSplineBasis(g.first(), g.last(), manifest.at("n_basis_g").get<int>()),
                   BSplineBasis(s.first(), s.last(), manifest.at("n_basis_s").get<int>())};
    const Matrix intercept = read_matrix_csv(dir / "intercept.csv");
    if (intercept.rows() != s.size()) fail(ErrorKind::InvalidData, dir.string() + ": intercept length mismatch");
    model.intercept = intercept.col(1);
    model.response_mean = intercept.col(2);
    model.regression_weights = read_matrix_csv(dir / "regression_weights.csv");
    model.chosen_penalty = manifest.at("chosen_penalty").get<double>();
    model.train_mspe = manifest.at("train_mspe").get<double>();
    model.penalty_grid = manifest.at("penalty_grid").get<std::vector<double>>();
    model.gcv_trace = manifest.at("gcv_trace").get<std::vector<double>>();
    const int p = manifest.at("predictors").get<int>();
    const auto& comp = manifest.at("compression");
    for (int j = 0; j < p; ++j) {
        const std::string tag = std::to_string(j + 1);
        Matrix c = read_matrix_csv(dir / ("coefficients_" + tag + ".csv"));
        if (c.rows() != model.basis_g.size() || c.cols() != model.basis_s.size()) {
            fail(ErrorKind::InvalidData, dir.string() + ": coefficient matrix " + tag + " has the wrong extents");
        }
        model.coefficients.push_back(std::move(c));
        PredictorCompression pc;
        pc.directions = read_matrix_csv(dir / ("compression_" + tag + ".csv"));
        pc.mean = read_matrix_csv(dir / ("predictor_mean_" + tag + ".csv")).col(1);
        const auto ev = comp.at(j).at("eigenvalues").get<std::vector<double>>();
        pc.eigenvalues = Eigen::Map<const Vector>(ev.data(), static_cast<Eigen::Index>(ev.size()));
        model.compression.push_back(std::move(pc));
    }
    return model;
}

std::string format_selection_csv(const std::vector<double>& mspe_train, const std::vector<double>& mspe_test,
                                 const std::vector<double>& seconds) {
    std::string out = "q,mspe_train,mspe_test,seconds\n";
    for (std::size_t q = 0; q < mspe_test.size(); ++q) {
        out += std::to_string(q) + ',' + format_double(mspe_train[q]) + ',' + format_double(mspe_test[q]) + ',' +
               format_double(seconds[q]) + '\n';
    }
    return out;
}

void write_resplit_summary(const fs::path& dir, const ResplitSummary& summary) {
    fs::create_directories(dir);
    write_text(dir / "selection.csv",
               format_selection_csv(summary.mean_mspe_train, summary.mean_mspe_test, summary.mean_seconds));
    json resplits = json::array();
    for (std::size_t r = 0; r < summary.resplits.size(); ++r) {
        const auto& res = summary.resplits[r];
        char name[32];
        std::snprintf(name, sizeof name, "resplit_%03zu.csv", r + 1);
        write_text(dir / name, format_selection_csv(res.mspe_train, res.mspe_test, res.seconds));
        resplits.push_back({{"file", name},
                            {"q_min", res.q_min},
                            {"split_seed", res.split_seed},
                            {"split_stream", res.split_stream},
                            {"train", res.split.train},
                            {"test", res.split.test}});
    }
    json out = {
        {"q_min", summary.q_min},
        {"components", summary.components},
        {"q_min_counts", summary.q_min_counts},
        {"resplits", resplits},
    };
    write_text(dir / "summary.json", out.dump(2) + "\n");
}

}  // namespace hybridfpca
