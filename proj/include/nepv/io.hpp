#pragma once

// Files: Matrix Market matrices, problem bundles (manifest.json + five .mtx),
// solutions and reference JSON, convergence CSV, SVG plots.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nepv/arnoldi.hpp"
#include "nepv/oracle.hpp"

namespace nepv::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double parse_double(const std::string& tok, const std::string& path)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) {
            throw IoError(path + ": malformed number '" + tok + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        throw IoError(path + ": malformed number '" + tok + "'");
    }
}

} // namespace detail

/// Writes a dense complex matrix in Matrix Market array format. Hermitian
/// matrices store only the lower triangle.
inline void write_matrix_market(const fs::path& path, const Matrix& m, bool hermitian = false)
{
    if (hermitian && m != m.adjoint()) {
        throw InvalidArgument(path.string() + ": matrix is not exactly Hermitian");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "%%MatrixMarket matrix array complex " << (hermitian ? "hermitian" : "general") << '\n';
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = hermitian ? j : 0; i < m.rows(); ++i) {
            out << detail::fmt17(m(i, j).real()) << ' ' << detail::fmt17(m(i, j).imag()) << '\n';
        }
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

/// Reads array or coordinate Matrix Market files (real/complex/integer,
/// general/symmetric/hermitian/skew-symmetric) into a dense complex matrix.
inline Matrix read_matrix_market(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    const std::string p = path.string();
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(p + ": empty file");
    }
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    banner = detail::lower(banner);
    object = detail::lower(object);
    format = detail::lower(format);
    field = detail::lower(field);
    symmetry = detail::lower(symmetry);
    if (banner != "%%matrixmarket" || object != "matrix") {
        throw IoError(p + ": not a Matrix Market matrix");
    }
    if (format != "array" && format != "coordinate") {
        throw IoError(p + ": unsupported format " + format);
    }
    if (field != "complex" && field != "real" && field != "integer") {
        throw IoError(p + ": unsupported field " + field);
    }
    if (symmetry != "general" && symmetry != "symmetric" && symmetry != "hermitian" &&
        symmetry != "skew-symmetric") {
        throw IoError(p + ": unsupported symmetry " + symmetry);
    }
    const bool cplx_field = field == "complex";
    do {
        if (!std::getline(in, line)) {
            throw IoError(p + ": missing size line");
        }
    } while (line.empty() || line[0] == '%');

    std::istringstream ss(line);
    long long rows = -1, cols = -1, nnz = -1;
    ss >> rows >> cols;
    if (format == "coordinate") {
        ss >> nnz;
    }
    if (!ss || rows < 0 || cols < 0 || (format == "coordinate" && nnz < 0)) {
        throw IoError(p + ": malformed size line");
    }
    if (symmetry != "general" && rows != cols) {
        throw IoError(p + ": symmetric storage requires a square matrix");
    }
    Matrix m = Matrix::Zero(rows, cols);

    std::string tok;
    auto next = [&]() -> double {
        if (!(in >> tok)) {
            throw IoError(p + ": unexpected end of data");
        }
        return detail::parse_double(tok, p);
    };
    auto place = [&](Index i, Index j, cplx v) {
        m(i, j) = v;
        if (i != j) {
            if (symmetry == "symmetric") {
                m(j, i) = v;
            } else if (symmetry == "hermitian") {
                m(j, i) = std::conj(v);
            } else if (symmetry == "skew-symmetric") {
                m(j, i) = -v;
            }
        }
    };
    auto value = [&]() {
        const double re = next();
        const double im = cplx_field ? next() : 0.0;
        return cplx(re, im);
    };

    if (format == "array") {
        for (Index j = 0; j < cols; ++j) {
            const Index start = symmetry == "general" ? 0 : (symmetry == "skew-symmetric" ? j + 1 : j);
            for (Index i = start; i < rows; ++i) {
                place(i, j, value());
            }
        }
    } else {
        for (long long k = 0; k < nnz; ++k) {
            const double fi = next();
            const double fj = next();
            const auto i = static_cast<Index>(fi) - 1;
            const auto j = static_cast<Index>(fj) - 1;
            if (i < 0 || j < 0 || i >= rows || j >= cols || fi != std::floor(fi) || fj != std::floor(fj)) {
                throw IoError(p + ": entry index out of range");
            }
            place(i, j, value());
        }
    }
    if (symmetry == "hermitian") {
        for (Index i = 0; i < rows; ++i) {
            if (m(i, i).imag() != 0.0) {
                throw IoError(p + ": hermitian matrix with complex diagonal");
            }
        }
    }
    if (in >> tok) {
        throw IoError(p + ": trailing data");
    }
    return m;
}

/// Problem metadata saved next to the matrices.
struct Manifest {
    std::string generator = "custom";
    json params = json::object();
    Index n = 0;
};

struct ProblemBundle {
    Manifest manifest;
    NepvProblem problem;
};

inline constexpr std::array<const char*, 5> kMatrixNames = {"A", "B", "C", "P", "Q"};

inline void save_bundle(const fs::path& dir, const NepvProblem& pb, const Manifest& man)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    const std::array<const Matrix*, 5> mats = {&pb.A(), &pb.B(), &pb.C(), &pb.P(), &pb.Q()};
    json files = json::object();
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const std::string file = std::string(kMatrixNames[k]) + ".mtx";
        write_matrix_market(dir / file, *mats[k], true);
        files[kMatrixNames[k]] = file;
    }
    json j;
    j["schema_version"] = kSchemaVersion;
    j["generator"] = man.generator;
    j["params"] = man.params;
    j["n"] = pb.n();
    j["files"] = files;
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) {
        throw IoError("cannot write manifest in " + dir.string());
    }
    out << j.dump(2) << '\n';
}

inline json read_json(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

/// Loads and validates a bundle. File problems raise IoError; invalid
/// matrices raise the validation errors of NepvProblem.
inline ProblemBundle load_bundle(const fs::path& dir)
{
    const json j = read_json(dir / "manifest.json");
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw IoError(dir.string() + ": unsupported schema_version");
        }
        Manifest man;
        man.generator = j.at("generator").get<std::string>();
        man.params = j.value("params", json::object());
        man.n = j.at("n").get<Index>();
        std::array<Matrix, 5> mats;
        for (std::size_t k = 0; k < mats.size(); ++k) {
            mats[k] = read_matrix_market(dir / j.at("files").at(kMatrixNames[k]).get<std::string>());
        }
        NepvProblem pb(mats[0], mats[1], mats[2], mats[3], mats[4]);
        if (pb.n() != man.n) {
            throw IoError(dir.string() + ": manifest n does not match the matrices");
        }
        return {man, std::move(pb)};
    } catch (const json::exception& e) {
        throw IoError(dir.string() + "/manifest.json: " + e.what());
    }
}

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline json vector_to_json(const Vector& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        a.push_back(to_json(v(i)));
    }
    return a;
}

inline Vector vector_from_json(const json& j)
{
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Index>(i)) = complex_from_json(j.at(i));
    }
    return v;
}

inline json candidate_to_json(const CandidateSolution& c)
{
    json j;
    j["lambda"] = to_json(c.lambda);
    j["mu"] = to_json(c.mu);
    j["classification"] = to_string(c.classification);
    j["residual_nepv"] = c.residual_nepv;
    j["residual_mu"] = c.residual_mu;
    j["v"] = vector_to_json(c.v);
    return j;
}

inline CandidateSolution candidate_from_json(const json& j)
{
    CandidateSolution c;
    c.lambda = complex_from_json(j.at("lambda"));
    c.mu = complex_from_json(j.at("mu"));
    c.classification = classification_from_string(j.at("classification").get<std::string>());
    c.residual_nepv = j.value("residual_nepv", 0.0);
    c.residual_mu = j.value("residual_mu", 0.0);
    if (j.contains("v")) {
        c.v = vector_from_json(j.at("v"));
    }
    return c;
}

inline json solutions_to_json(const SolverResult& r)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["algorithm"] = to_string(r.algorithm);
    j["shift"] = to_json(r.shift);
    j["iterations"] = r.iterations;
    j["invariant_subspace"] = r.invariant;
    j["probe"] = to_string(r.probe.kind);
    if (r.singular_at) {
        j["projected_pencil_singular_at"] = *r.singular_at;
    }
    json sols = json::array();
    for (std::size_t i = 0; i < r.solutions.size(); ++i) {
        json s = candidate_to_json(r.solutions[i]);
        s["track_id"] = r.solution_tracks[i];
        if (r.solution_converged_at[i]) {
            s["converged_at"] = *r.solution_converged_at[i];
        }
        s["delta_residual"] = r.delta_residuals[i];
        sols.push_back(std::move(s));
    }
    j["solutions"] = std::move(sols);
    return j;
}

/// Candidates stored in a solutions or reference file under `key`.
inline std::vector<CandidateSolution> candidates_from_json(const json& j, const std::string& key)
{
    std::vector<CandidateSolution> out;
    try {
        for (const auto& s : j.at(key)) {
            out.push_back(candidate_from_json(s));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed solutions: ") + e.what());
    }
    return out;
}

inline json reference_to_json(const ReferenceSpectrum& ref, const ScfResult* scf, double dedup)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["singular"] = ref.singular;
    j["deflated"] = ref.deflated;
    json entries = json::array();
    for (const auto& e : ref.entries) {
        json x;
        x["lambda"] = to_json(e.lambda);
        x["mu"] = to_json(e.mu);
        x["classification"] = to_string(e.candidate.classification);
        x["delta_residual"] = e.delta_residual;
        entries.push_back(std::move(x));
    }
    j["spectrum"] = std::move(entries);
    json genuine = json::array();
    for (const auto& c : ref.genuine(dedup)) {
        genuine.push_back(candidate_to_json(c));
    }
    j["genuine"] = std::move(genuine);
    if (scf != nullptr) {
        json s = json::array();
        for (const auto& c : scf->solutions) {
            s.push_back(candidate_to_json(c));
        }
        j["scf"] = std::move(s);
        j["scf_attempts"] = scf->attempts;
        j["scf_dropped"] = scf->dropped;
    }
    return j;
}

inline json cross_validation_to_json(const CrossValidation& cv)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["matched"] = cv.matched;
    j["missing"] = cv.missing;
    j["extra"] = cv.extra;
    json pairs = json::array();
    for (const auto& [f, r] : cv.pairs) {
        pairs.push_back(json::array({f, r}));
    }
    j["pairs"] = std::move(pairs);
    j["missing_indices"] = cv.missing_indices;
    j["extra_indices"] = cv.extra_indices;
    return j;
}

inline void write_convergence_csv(const fs::path& path, const ConvergenceLog& log)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "iter,track_id,lambda_re,lambda_im,abs_error_vs_final,residual_estimate\n";
    for (const auto& r : log.records()) {
        out << r.iteration << ',' << r.track_id << ',' << detail::fmt17(r.lambda.real()) << ','
            << detail::fmt17(r.lambda.imag()) << ',' << detail::fmt17(r.abs_error_vs_final) << ','
            << detail::fmt17(r.residual_estimate) << '\n';
    }
}

namespace detail {

struct Frame {
    double x0, x1, y0, y1;
    static constexpr double W = 640, H = 420, L = 70, R = 20, T = 30, B = 50;
    [[nodiscard]] double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
    [[nodiscard]] double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

inline std::string svg_header(const Frame& f, const std::string& title, const std::string& xlabel,
                              const std::string& ylabel)
{
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::W << "\" height=\"" << Frame::H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << Frame::W / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
    s << "<rect x=\"" << Frame::L << "\" y=\"" << Frame::T << "\" width=\"" << Frame::W - Frame::L - Frame::R
      << "\" height=\"" << Frame::H - Frame::T - Frame::B << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << Frame::W / 2 << "\" y=\"" << Frame::H - 10 << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
    s << "<text x=\"15\" y=\"" << Frame::H / 2 << "\" transform=\"rotate(-90 15 " << Frame::H / 2
      << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double y = f.y0 + (f.y1 - f.y0) * k / 4.0;
        s << "<text x=\"" << f.px(x) << "\" y=\"" << Frame::H - Frame::B + 15 << "\" text-anchor=\"middle\">"
          << std::to_string(static_cast<long long>(std::lround(x))) << "</text>\n";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", y);
        s << "<text x=\"" << Frame::L - 5 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\">" << buf
          << "</text>\n";
    }
    return s.str();
}

} // namespace detail

/// Per-track log10 |λ_k − λ_final| against the iteration.
inline void write_convergence_svg(const fs::path& path, const ConvergenceLog& log)
{
    std::map<Index, std::vector<std::pair<double, double>>> tracks;
    double kmax = 1.0;
    double ymin = -16.0;
    double ymax = 0.0;
    for (const auto& r : log.records()) {
        const double e = std::log10(std::max(r.abs_error_vs_final, 1e-16));
        tracks[r.track_id].emplace_back(static_cast<double>(r.iteration), e);
        kmax = std::max(kmax, static_cast<double>(r.iteration));
        ymax = std::max(ymax, std::ceil(e));
    }
    const detail::Frame f{0.0, kmax, ymin, ymax};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << detail::svg_header(f, "Ritz value convergence", "iteration", "log10 |lambda_k - lambda_final|");
    for (const auto& [id, pts] : tracks) {
        if (pts.size() < 2) {
            continue;
        }
        out << "<polyline fill=\"none\" stroke=\"hsl(" << (id * 47) % 360 << ",70%,40%)\" stroke-width=\"1\" points=\"";
        for (const auto& [x, y] : pts) {
            out << f.px(x) << ',' << f.py(y) << ' ';
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

/// Real parts of the final Ritz values (circles) and of the genuine
/// solutions (crosses), each sorted, against their index.
inline void write_spectrum_svg(const fs::path& path, const std::vector<cplx>& ritz, const std::vector<cplx>& genuine)
{
    std::vector<double> a, g;
    for (const auto& z : ritz) {
        a.push_back(z.real());
    }
    for (const auto& z : genuine) {
        g.push_back(z.real());
    }
    std::sort(a.begin(), a.end());
    std::sort(g.begin(), g.end());
    double lo = 0.0, hi = 1.0;
    if (!a.empty() || !g.empty()) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (double x : a) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        for (double x : g) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (hi <= lo) {
            hi = lo + 1.0;
        }
    }
    const double nmax = static_cast<double>(std::max<std::size_t>({a.size(), g.size(), 2}));
    const detail::Frame f{0.0, nmax - 1.0, lo, hi};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << detail::svg_header(f, "Ritz values and genuine eigenvalues", "index", "Re lambda");
    for (std::size_t i = 0; i < a.size(); ++i) {
        out << "<circle cx=\"" << f.px(static_cast<double>(i)) << "\" cy=\"" << f.py(a[i])
            << "\" r=\"3\" fill=\"none\" stroke=\"steelblue\"/>\n";
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = f.px(static_cast<double>(i));
        const double y = f.py(g[i]);
        out << "<path d=\"M" << x - 4 << ',' << y - 4 << " L" << x + 4 << ',' << y + 4 << " M" << x - 4 << ','
            << y + 4 << " L" << x + 4 << ',' << y - 4 << "\" stroke=\"firebrick\"/>\n";
    }
    out << "</svg>\n";
}

} // namespace nepv::io
