#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dsfmin/dsf.hpp"
#include "dsfmin/error.hpp"
#include "dsfmin/rational_matrix.hpp"
#include "dsfmin/state_space.hpp"
#include "dsfmin/tolerances.hpp"

namespace dsfmin {

using Json = nlohmann::ordered_json;

enum class ModelKind { StateSpace, DsfCoeff, DsfPoleResidue };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::StateSpace: return "state_space";
        case ModelKind::DsfCoeff: return "dsf_coeff";
        case ModelKind::DsfPoleResidue: return "dsf_pole_residue";
    }
    return "?";
}

/// Tolerance values set on the command line; they win over the file's.
struct ToleranceOverrides {
    std::optional<double> pole, root, eval, rank, orth, structure;

    void apply(Tolerances& t) const {
        if (pole) t.pole = *pole;
        if (root) t.root = *root;
        if (eval) t.eval = *eval;
        if (rank) t.rank = *rank;
        if (orth) t.orth = *orth;
        if (structure) t.structure = *structure;
    }
};

/// A parsed model. State-space files carry a partitioned realization (already
/// in output normal form); DSF files carry the DSF.
struct ModelFile {
    ModelKind kind = ModelKind::StateSpace;
    Tolerances tol;
    std::optional<PartitionedRealization> realization;
    std::optional<Dsf> dsf;

    /// The DSF of the model, computed from the realization when needed.
    Dsf structure_function() const { return dsf ? *dsf : compute_dsf(*realization, tol); }
};

namespace detail {

// Schema walker that remembers where it is, for error messages.
class Field {
   public:
    Field(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const Json& json() const { return j_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& what) const { throw Error(ErrorKind::SchemaError, path_ + ": " + what); }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    Field at(const char* key) const {
        if (!j_.is_object()) fail("expected an object");
        if (!j_.contains(key)) fail(std::string("missing field \"") + key + "\"");
        return {j_.at(key), path_ + "." + key};
    }
    Field at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

    std::size_t array_size() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }
    double number() const {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }
    std::vector<double> numbers() const {
        std::vector<double> v(array_size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i).number();
        return v;
    }
    Matrix matrix() const {
        const std::size_t rows = array_size();
        if (rows == 0) return Matrix(0, 0);
        const std::size_t cols = at(std::size_t{0}).array_size();
        Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
        for (std::size_t i = 0; i < rows; ++i) {
            const Field row = at(i);
            if (row.array_size() != cols)
                row.fail("ragged matrix: row has " + std::to_string(row.array_size()) + " entries, expected " + std::to_string(cols));
            for (std::size_t k = 0; k < cols; ++k) m(static_cast<Index>(i), static_cast<Index>(k)) = row.at(k).number();
        }
        return m;
    }

   private:
    const Json& j_;
    std::string path_;
};

inline void expect_shape(const Field& f, const Matrix& m, Index rows, Index cols) {
    if (m.rows() != rows || m.cols() != cols)
        f.fail("expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
               std::to_string(m.cols()));
}

inline RationalMatrix parse_coeff_matrix(const Field& f, Index rows, std::optional<Index> cols, const Tolerances& tol) {
    if (static_cast<Index>(f.array_size()) != rows) f.fail("expected " + std::to_string(rows) + " rows");
    const Index c = cols ? *cols : (rows > 0 ? static_cast<Index>(f.at(std::size_t{0}).array_size()) : 0);
    RationalMatrix m(rows, c);
    for (Index i = 0; i < rows; ++i) {
        const Field row = f.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.array_size()) != c) row.fail("ragged matrix: expected " + std::to_string(c) + " entries");
        for (Index j = 0; j < c; ++j) {
            const Field e = row.at(static_cast<std::size_t>(j));
            const Polynomial num(e.at("num").numbers());
            const Polynomial den(e.at("den").numbers());
            if (den.is_zero()) e.at("den").fail("denominator is zero");
            m.set(i, j, rat_reduce(num, den, tol.root));
        }
    }
    return m;
}

inline Tolerances parse_tolerances(const Field& root) {
    Tolerances t;
    if (!root.has("tolerances")) return t;
    const Field f = root.at("tolerances");
    if (!f.json().is_object()) f.fail("expected an object");
    for (const auto& [key, value] : f.json().items()) {
        const Field v(value, f.path() + "." + key);
        double* slot = key == "pole"        ? &t.pole
                       : key == "root"      ? &t.root
                       : key == "eval"      ? &t.eval
                       : key == "rank"      ? &t.rank
                       : key == "orth"      ? &t.orth
                       : key == "structure" ? &t.structure
                                            : nullptr;
        if (!slot) v.fail("unknown tolerance");
        *slot = v.number();
        if (!(*slot > 0.0)) v.fail("tolerances must be positive");
    }
    return t;
}

inline int line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace detail

/// Parses model JSON text. `source` names the input in diagnostics.
inline ModelFile parse_model_text(const std::string& text, const ToleranceOverrides& overrides = {},
                                  const std::string& source = "<input>") {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError,
                    source + ": line " + std::to_string(detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
    }
    const detail::Field root(j, source);
    if (!j.is_object()) root.fail("expected a JSON object");
    const detail::Field kind_field = root.at("kind");
    if (!kind_field.json().is_string()) kind_field.fail("expected a string");
    const std::string kind = kind_field.json().get<std::string>();

    ModelFile out;
    out.tol = detail::parse_tolerances(root);
    overrides.apply(out.tol);

    if (kind == "state_space") {
        out.kind = ModelKind::StateSpace;
        const Matrix a = root.at("A").matrix();
        const Index n = a.rows();
        if (a.cols() != n) root.at("A").fail("A must be square");
        if (n == 0) root.at("A").fail("A must have at least one state");
        const Matrix b = root.at("B").matrix();
        if (b.rows() != n) root.at("B").fail("B must have " + std::to_string(n) + " rows");
        if (b.cols() == 0) root.at("B").fail("B must have at least one column");
        std::optional<Index> p;
        if (root.has("p")) {
            const detail::Field pf = root.at("p");
            if (!pf.json().is_number_integer()) pf.fail("expected an integer");
            p = pf.json().get<Index>();
            if (*p < 1 || *p > n) pf.fail("p must be between 1 and " + std::to_string(n));
        }
        Matrix c;
        if (root.has("C")) {
            c = root.at("C").matrix();
            if (c.cols() != n) root.at("C").fail("C must have " + std::to_string(n) + " columns");
            if (p && c.rows() != *p) root.at("C").fail("C must have p=" + std::to_string(*p) + " rows");
            if (c.rows() == 0) root.at("C").fail("C must have at least one row");
        } else {
            if (!p) root.fail("state_space needs C or p");
            c = Matrix::Identity(*p, n);
        }
        out.realization = output_normal_form(StateSpace(a, b, c), out.tol);
    } else if (kind == "dsf_coeff") {
        out.kind = ModelKind::DsfCoeff;
        const detail::Field qf = root.at("Q");
        const auto p = static_cast<Index>(qf.array_size());
        if (p == 0) qf.fail("Q must have at least one row");
        RationalMatrix q = detail::parse_coeff_matrix(qf, p, p, out.tol);
        RationalMatrix pm = detail::parse_coeff_matrix(root.at("P"), p, std::nullopt, out.tol);
        out.dsf = Dsf::make(std::move(q), std::move(pm), out.tol);
    } else if (kind == "dsf_pole_residue") {
        out.kind = ModelKind::DsfPoleResidue;
        const detail::Field pf = root.at("poles"), kq = root.at("KQ"), kp = root.at("KP");
        const std::vector<double> poles = pf.numbers();
        if (poles.empty()) pf.fail("need at least one pole");
        if (kq.array_size() != poles.size()) kq.fail("need one residue matrix per pole");
        if (kp.array_size() != poles.size()) kp.fail("need one residue matrix per pole");
        std::vector<Matrix> rq, rp;
        for (std::size_t k = 0; k < poles.size(); ++k) {
            rq.push_back(kq.at(k).matrix());
            rp.push_back(kp.at(k).matrix());
        }
        const Index p = rq[0].rows(), m = rp[0].cols();
        if (p == 0) kq.fail("residues must have at least one row");
        for (std::size_t k = 0; k < poles.size(); ++k) {
            detail::expect_shape(kq.at(k), rq[k], p, p);
            detail::expect_shape(kp.at(k), rp[k], p, m);
        }
        PoleResidueForm fq{poles, rq, Matrix::Zero(p, p)};
        PoleResidueForm fp{poles, rp, Matrix::Zero(p, m)};
        out.dsf = Dsf::make(from_pole_residue(fq, out.tol.root), from_pole_residue(fp, out.tol.root), out.tol);
    } else {
        kind_field.fail("unknown kind \"" + kind + "\" (expected state_space, dsf_coeff or dsf_pole_residue)");
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

inline ModelFile parse_model(const std::filesystem::path& path, const ToleranceOverrides& overrides = {}) {
    return parse_model_text(read_text_file(path), overrides, path.string());
}

namespace detail {

inline Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json coeff_matrix_json(const RationalMatrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            const RationalFunction& f = m(i, j);
            Json num = Json::array(), den = Json::array();
            for (double c : f.num().coeffs()) num.push_back(c);
            if (num.empty()) num.push_back(0.0);
            for (double c : f.den().coeffs()) den.push_back(c);
            row.push_back(Json{{"num", std::move(num)}, {"den", std::move(den)}});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

inline Json dsf_to_json(const Dsf& d) {
    return Json{{"kind", "dsf_coeff"}, {"Q", detail::coeff_matrix_json(d.Q())}, {"P", detail::coeff_matrix_json(d.P())}};
}

/// A partitioned realization as a state_space file with C = [I 0].
inline Json realization_to_json(const PartitionedRealization& r) {
    return Json{{"kind", "state_space"},
                {"A", detail::matrix_json(r.A())},
                {"B", detail::matrix_json(r.B())},
                {"C", detail::matrix_json(r.C())},
                {"p", r.p()}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace dsfmin
