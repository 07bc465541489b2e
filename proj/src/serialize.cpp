#include "asym/serialize.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace asym::io {

namespace {

using Index = Eigen::Index;

ValidationError config_error(const std::string& context, const std::string& what) {
    return ValidationError(context + ": " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) throw config_error(context, std::string("missing field '") + key + "'");
    return *it;
}

std::size_t as_count(const Json& j, const std::string& context) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw config_error(context, "expected a non-negative integer");
    const auto v = j.get<long long>();
    if (v < 0) throw config_error(context, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::vector<double> as_reals(const Json& j, const std::string& context) {
    if (!j.is_array()) throw config_error(context, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw config_error(context, "expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Eigen::MatrixXd real_matrix(const Json& j, const std::string& context) {
    if (!j.is_array() || j.empty()) throw config_error(context, "expected a non-empty array of rows");
    const Index rows = static_cast<Index>(j.size());
    Index cols = -1;
    Eigen::MatrixXd m;
    for (Index r = 0; r < rows; ++r) {
        const auto row = as_reals(j[static_cast<std::size_t>(r)], context);
        if (cols < 0) {
            cols = static_cast<Index>(row.size());
            m.resize(rows, cols);
        }
        if (static_cast<Index>(row.size()) != cols) throw config_error(context, "ragged matrix rows");
        for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

Json real_rows(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_number(double x) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return buf.data();
}

}  // namespace

void require_object(const Json& obj, const std::string& context) {
    if (!obj.is_object()) throw config_error(context, "expected an object");
}

void require_fields(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& context) {
    require_object(obj, context);
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw config_error(context, "unknown field '" + key + "'");
    }
}

Json to_json(const ComplexMatrix& m) {
    if (m.imag().cwiseAbs().maxCoeff() == 0.0) return real_rows(m.real());
    return Json{{"re", real_rows(m.real())}, {"im", real_rows(m.imag())}};
}

ComplexMatrix matrix_from_json(const Json& j, const std::string& context) {
    if (j.is_array()) return real_matrix(j, context).cast<Complex>();
    require_fields(j, {"re", "im"}, context);
    const Eigen::MatrixXd re = real_matrix(field(j, "re", context), context + ".re");
    Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
    if (j.contains("im")) im = real_matrix(j["im"], context + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols()) throw config_error(context, "re and im shapes differ");
    ComplexMatrix out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
}

ComplexVector vector_from_json(const Json& j, const std::string& context) {
    if (j.is_array()) {
        const auto re = as_reals(j, context);
        ComplexVector v(static_cast<Index>(re.size()));
        for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Index>(i)) = re[i];
        return v;
    }
    require_fields(j, {"re", "im"}, context);
    const auto re = as_reals(field(j, "re", context), context + ".re");
    std::vector<double> im(re.size(), 0.0);
    if (j.contains("im")) im = as_reals(j["im"], context + ".im");
    if (im.size() != re.size()) throw config_error(context, "re and im lengths differ");
    ComplexVector v(static_cast<Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Index>(i)) = Complex(re[i], im[i]);
    return v;
}

DensityMatrix state_from_json(const Json& j, const std::string& context) {
    require_fields(j, {"basis", "dim", "diagonal", "maximally_mixed", "uniform", "pure", "matrix"}, context);
    if (j.contains("basis")) {
        return DensityMatrix::basis(as_count(field(j, "dim", context), context + ".dim"), as_count(j["basis"], context + ".basis"));
    }
    if (j.contains("dim")) throw config_error(context, "'dim' is only valid together with 'basis'");
    if (j.size() != 1) throw config_error(context, "exactly one state form must be given");
    if (j.contains("diagonal")) {
        const auto p = as_reals(j["diagonal"], context + ".diagonal");
        return DensityMatrix::diagonal(p);
    }
    if (j.contains("maximally_mixed")) return DensityMatrix::maximally_mixed(as_count(j["maximally_mixed"], context));
    if (j.contains("uniform")) {
        const std::size_t d = as_count(j["uniform"], context + ".uniform");
        if (d == 0) throw config_error(context, "uniform dimension must be positive");
        return DensityMatrix::pure(ComplexVector::Ones(static_cast<Index>(d)) / std::sqrt(static_cast<double>(d)));
    }
    if (j.contains("pure")) {
        ComplexVector v = vector_from_json(j["pure"], context + ".pure");
        const double n = v.norm();
        if (n == 0.0) throw config_error(context, "zero state vector");
        return DensityMatrix::pure(v / n);
    }
    return DensityMatrix(matrix_from_json(j["matrix"], context + ".matrix"));
}

Hamiltonian hamiltonian_from_json(const Json& j, const std::string& context) {
    require_fields(j, {"energies", "matrix"}, context);
    if (j.size() != 1) throw config_error(context, "give exactly one of 'energies' or 'matrix'");
    if (j.contains("energies")) return Hamiltonian::diagonal(as_reals(j["energies"], context + ".energies"));
    return Hamiltonian(matrix_from_json(j["matrix"], context + ".matrix"));
}

GroupAction group_from_json(const Json& j, const std::string& context) {
    require_object(j, context);
    if (!j.contains("type") || !j["type"].is_string()) throw config_error(context, "missing string field 'type'");
    const std::string type = j["type"].get<std::string>();
    if (type == "time_translation") {
        require_fields(j, {"type", "energies"}, context);
        return GroupAction::time_translation(Hamiltonian::diagonal(as_reals(field(j, "energies", context), context + ".energies")));
    }
    if (type == "cyclic") {
        require_fields(j, {"type", "order", "energies"}, context);
        const auto h = Hamiltonian::diagonal(as_reals(field(j, "energies", context), context + ".energies"));
        return GroupAction::cyclic_phases(as_count(field(j, "order", context), context + ".order"), h);
    }
    if (type == "permutation") {
        require_fields(j, {"type", "n"}, context);
        return GroupAction::permutation(as_count(field(j, "n", context), context + ".n"));
    }
    throw config_error(context, "unknown group type '" + type + "' (time_translation, cyclic, permutation)");
}

Json to_json(const FeasibilityReport& r) {
    Json j{{"status", to_string(r.status)},
           {"iterations", r.iterations},
           {"gap_estimate", r.gap_estimate},
           {"linear_residual", r.linear_residual},
           {"final_residual", r.residual_history.empty() ? 0.0 : r.residual_history.back()},
           {"note", r.note}};
    if (r.choi_out) j["choi"] = to_json(r.choi_out->choi());
    return j;
}

Json to_json(const ScanPoint& p) {
    return Json{{"slack", p.slack}, {"best", p.best}, {"upper", p.upper}, {"undecided", p.undecided}, {"solves", p.solves}};
}

Json to_json(const CloningChainReport& r) {
    return Json{{"fisher_r_in", r.fisher_r_in},
                {"fisher_s_in", r.fisher_s_in},
                {"fisher_joint_in", r.fisher_joint_in},
                {"fisher_joint_out", r.fisher_joint_out},
                {"fisher_r_out", r.fisher_r_out},
                {"fisher_s_out", r.fisher_s_out},
                {"chain_slack", r.chain_slack},
                {"covariance_residual", r.covariance_residual},
                {"r_marginal_change", r.r_marginal_change},
                {"product_defect", r.product_defect},
                {"verdict", r.verdict}};
}

Json to_json(const KIDecomposition& d) {
    Json blocks = Json::array();
    for (const auto& b : d.blocks)
        blocks.push_back(Json{{"dim_j", b.dim_j}, {"dim_k", b.dim_k}, {"isometry", to_json(b.isometry)}, {"omega", to_json(b.omega)}});
    return Json{{"dim", d.dim},
                {"support_dim", d.support.cols()},
                {"blocks", blocks},
                {"weights", d.weights},
                {"structure_residual", d.structure_residual},
                {"reconstruction_residual", d.reconstruction_residual},
                {"diagnostics", d.diagnostics}};
}

Json to_json(const SpectrumReport& r) {
    return Json{{"constant", r.constant},
                {"spectrum_deviation", r.spectrum_deviation},
                {"weight_deviation", r.weight_deviation},
                {"max_spectrum_deviation", r.max_spectrum_deviation},
                {"max_weight_deviation", r.max_weight_deviation}};
}

Json to_json(const LadderTrace& t) {
    return Json{{"coherence", t.coherence},
                {"purity", t.purity},
                {"shift_expectation", t.shift_expectation},
                {"leakage", t.leakage}};
}

Json to_json(const ClockRow& r) {
    return Json{{"alpha_re", r.alpha.real()},
                {"alpha_im", r.alpha.imag()},
                {"cutoff", r.cutoff},
                {"score", r.score},
                {"closed_form_score", r.closed_form_score},
                {"closed_form_error", r.closed_form_error},
                {"overlaps", real_rows(r.overlaps)}};
}

Json to_json(const BatteryReport& r) {
    return Json{{"disturbance", r.disturbance}, {"coherence_out", r.coherence_out}, {"consistent", r.consistent}};
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
    return out.str();
}

std::string ladder_csv(const LadderTrace& t) {
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < t.size(); ++n)
        rows.push_back({static_cast<double>(n + 1), t.coherence[n], t.purity[n], t.shift_expectation[n], t.leakage[n]});
    return to_csv({"n", "coherence", "purity", "shift_expectation", "leakage"}, rows);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path.string() + "' for writing");
    f << content;
    if (!f) throw Error("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot read '" + path.string() + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace asym::io
