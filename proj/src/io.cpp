#include "sbmreg/io.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace sbmreg {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << content;
    if (!out) throw InputError("write failed for " + path);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream ss(read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

long parse_count(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        throw InputError("non-integer count at " + where + ": '" + s + "'");
    }
    if (used != s.size())
        throw InputError("non-integer count at " + where + ": '" + s + "'");
    if (v < 0) throw InputError("negative count at " + where);
    return v;
}

double parse_real(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InputError("malformed number at " + where + ": '" + s + "'");
    }
    if (used != s.size())
        throw InputError("malformed number at " + where + ": '" + s + "'");
    return v;
}

json parse_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
}

VectorXd to_vector(const json& j, const std::string& what) {
    if (!j.is_array()) throw InputError(what + " must be an array");
    VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

MatrixXd to_matrix(const json& j, const std::string& what) {
    if (!j.is_array()) throw InputError(what + " must be an array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = rows > 0 ? j[0].size() : 0;
    MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw InputError(what + " has ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json from_vector(const VectorXd& v) {
    json j = json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

json from_matrix(const MatrixXd& m) {
    json j = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

ObservedNetwork load_edge_list(const std::vector<std::string>& lines,
                               const std::string& path) {
    const std::string& header = lines[0];
    const long n = parse_count(header.substr(2), path + " header");
    if (n < 1) throw InputError("edge list " + path + ": n must be positive");
    MatrixXi Y = MatrixXi::Zero(n, n);
    MatrixXi seen = MatrixXi::Zero(n, n);
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const std::string where = path + " line " + std::to_string(ln + 1);
        const auto fields = split(lines[ln], '\t');
        if (fields.size() != 3)
            throw InputError(where + ": expected i<TAB>j<TAB>count");
        const long i = parse_count(fields[0], where);
        const long j = parse_count(fields[1], where);
        const long c = parse_count(fields[2], where);
        if (i < 1 || i > n || j < 1 || j > n)
            throw InputError(where + ": node index out of range 1.." +
                             std::to_string(n));
        if (i == j && c != 0)
            throw InputError(where + ": nonzero diagonal entry at node " +
                             std::to_string(i));
        if (i == j) continue;
        if (seen(i - 1, j - 1))
            throw InputError(where + ": duplicate pair (" + std::to_string(i) +
                             "," + std::to_string(j) + ")");
        seen(i - 1, j - 1) = seen(j - 1, i - 1) = 1;
        if (c > std::numeric_limits<int>::max())
            throw InputError(where + ": count exceeds the 32-bit cap");
        Y(i - 1, j - 1) = Y(j - 1, i - 1) = static_cast<int>(c);
    }
    return ObservedNetwork::create(std::move(Y),
                                   MatrixXd::Zero(pair_count(static_cast<int>(n)), 0));
}

ObservedNetwork load_dense(const std::vector<std::string>& lines,
                           const std::string& path) {
    const int n = static_cast<int>(lines.size());
    MatrixXi Y(n, n);
    for (int r = 0; r < n; ++r) {
        const auto fields = split(lines[r], ',');
        if (static_cast<int>(fields.size()) != n)
            throw InputError(path + " line " + std::to_string(r + 1) + ": has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n));
        for (int c = 0; c < n; ++c) {
            const std::string where = path + " line " + std::to_string(r + 1) +
                                      ", column " + std::to_string(c + 1);
            const long v = parse_count(fields[c], where);
            if (v > std::numeric_limits<int>::max())
                throw InputError(where + ": count exceeds the 32-bit cap");
            Y(r, c) = static_cast<int>(v);
        }
    }
    return ObservedNetwork::create(std::move(Y), MatrixXd::Zero(pair_count(n), 0));
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

ObservedNetwork load_network(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw InputError(path + " is empty");
    if (lines[0].rfind("n=", 0) == 0) return load_edge_list(lines, path);
    return load_dense(lines, path);
}

MatrixXd load_covariates(const std::string& path, int n) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw InputError(path + " is empty");
    const auto header = split(lines[0], ',');
    if (header.size() < 2 || header[0] != "i" || header[1] != "j")
        throw InputError(path + ": header must be i,j,x1,...,xd");
    const int d = static_cast<int>(header.size()) - 2;
    const int P = pair_count(n);
    MatrixXd X(P, d);
    std::vector<char> seen(P, 0);
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const std::string where = path + " line " + std::to_string(ln + 1);
        const auto fields = split(lines[ln], ',');
        if (static_cast<int>(fields.size()) != d + 2)
            throw InputError(where + ": expected " + std::to_string(d + 2) +
                             " fields");
        const long i = parse_count(fields[0], where);
        const long j = parse_count(fields[1], where);
        if (i < 1 || j < 1 || i > n || j > n)
            throw InputError(where + ": node index out of range 1.." +
                             std::to_string(n));
        if (j <= i)
            throw InputError(where + ": pairs must satisfy i < j, got (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
        const int p = pair_index(n, static_cast<int>(i) - 1, static_cast<int>(j) - 1);
        if (seen[p])
            throw InputError(where + ": duplicate pair (" + std::to_string(i) +
                             "," + std::to_string(j) + ")");
        seen[p] = 1;
        for (int c = 0; c < d; ++c)
            X(p, c) = parse_real(fields[c + 2], where + ", column " +
                                                    std::to_string(c + 3));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!seen[pair_index(n, i, j)])
                throw InputError(path + ": missing pair (" + std::to_string(i + 1) +
                                 "," + std::to_string(j + 1) + ")");
    return X;
}

void save_network_dense(const std::string& path, const ObservedNetwork& net) {
    std::ostringstream out;
    for (int r = 0; r < net.n; ++r) {
        for (int c = 0; c < net.n; ++c) {
            if (c) out << ',';
            out << net.Y(r, c);
        }
        out << '\n';
    }
    write_file(path, out.str());
}

void save_network_edge_list(const std::string& path, const ObservedNetwork& net) {
    std::ostringstream out;
    out << "n=" << net.n << '\n';
    for (int i = 0; i < net.n; ++i)
        for (int j = i + 1; j < net.n; ++j)
            if (net.Y(i, j) != 0)
                out << (i + 1) << '\t' << (j + 1) << '\t' << net.Y(i, j) << '\n';
    write_file(path, out.str());
}

void save_covariates(const std::string& path, const MatrixXd& X, int n) {
    if (X.rows() != pair_count(n))
        throw InputError("covariate table must have one row per pair");
    std::ostringstream out;
    out << "i,j";
    for (int c = 0; c < X.cols(); ++c) out << ",x" << (c + 1);
    out << '\n';
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
            out << (i + 1) << ',' << (j + 1);
            for (int c = 0; c < X.cols(); ++c) out << ',' << format_double(X(p, c));
            out << '\n';
        }
    write_file(path, out.str());
}

ModelParams load_theta(const std::string& path) {
    const json j = parse_json(path);
    ModelParams theta;
    theta.nu = to_vector(j.at("nu"), path + ": nu");
    theta.alpha = to_matrix(j.at("alpha"), path + ": alpha");
    theta.beta = j.contains("beta") ? to_vector(j.at("beta"), path + ": beta")
                                    : VectorXd(0);
    theta.validate();
    return theta;
}

void save_theta(const std::string& path, const ModelParams& theta) {
    json j;
    j["nu"] = from_vector(theta.nu);
    j["alpha"] = from_matrix(theta.alpha);
    j["beta"] = from_vector(theta.beta);
    write_file(path, j.dump(2) + "\n");
}

PriorHyper load_hyper(const std::string& path) {
    const json j = parse_json(path);
    PriorHyper hyper;
    hyper.gamma0 = to_vector(j.at("gamma0"), path + ": gamma0");
    hyper.V0 = to_matrix(j.at("V0"), path + ": V0");
    hyper.e0 = to_vector(j.at("e0"), path + ": e0");
    hyper.validate();
    return hyper;
}

void save_hyper(const std::string& path, const PriorHyper& hyper) {
    json j;
    j["gamma0"] = from_vector(hyper.gamma0);
    j["V0"] = from_matrix(hyper.V0);
    j["e0"] = from_vector(hyper.e0);
    write_file(path, j.dump(2) + "\n");
}

ProxyPosterior load_proxy(const std::string& path) {
    const json j = parse_json(path);
    ProxyPosterior p;
    p.tau = to_matrix(j.at("tau"), path + ": tau");
    p.gamma_mean = to_vector(j.at("gamma_mean"), path + ": gamma_mean");
    p.gamma_cov = to_matrix(j.at("gamma_cov"), path + ": gamma_cov");
    p.dirichlet_param = to_vector(j.at("dirichlet_param"), path + ": dirichlet_param");
    p.ridged = j.value("ridged", false);
    const Eigen::LLT<MatrixXd> llt(p.gamma_cov);
    if (llt.info() != Eigen::Success)
        throw InputError(path + ": gamma_cov is not positive definite");
    p.gamma_chol = llt.matrixL();
    return p;
}

void save_proxy(const std::string& path, const ProxyPosterior& proxy) {
    json j;
    j["tau"] = from_matrix(proxy.tau);
    j["gamma_mean"] = from_vector(proxy.gamma_mean);
    j["gamma_cov"] = from_matrix(proxy.gamma_cov);
    j["dirichlet_param"] = from_vector(proxy.dirichlet_param);
    j["ridged"] = proxy.ridged;
    write_file(path, j.dump(2) + "\n");
}

std::vector<Particle> load_particles(const std::string& path) {
    std::vector<Particle> out;
    const auto lines = read_lines(path);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        json j;
        try {
            j = json::parse(lines[ln]);
        } catch (const json::exception& e) {
            throw InputError(path + " line " + std::to_string(ln + 1) +
                             ": malformed JSON: " + e.what());
        }
        Particle part;
        const auto& z = j.at("z");
        part.z.z.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            part.z.z[i] = z[i].get<int>() - 1;
        part.theta.nu = to_vector(j.at("nu"), "nu");
        part.theta.alpha = to_matrix(j.at("alpha"), "alpha");
        part.theta.beta = to_vector(j.at("beta"), "beta");
        part.W = j.at("W").get<double>();
        part.log_w = part.W > 0.0 ? std::log(part.W)
                                  : -std::numeric_limits<double>::infinity();
        out.push_back(std::move(part));
    }
    return out;
}

void save_particles(const std::string& path, const std::vector<Particle>& particles) {
    std::ostringstream out;
    for (const Particle& part : particles) {
        json j;
        json z = json::array();
        for (int i = 0; i < part.z.n(); ++i) z.push_back(part.z.z[i] + 1);
        j["z"] = std::move(z);
        j["nu"] = from_vector(part.theta.nu);
        j["alpha"] = from_matrix(part.theta.alpha);
        j["beta"] = from_vector(part.theta.beta);
        j["W"] = part.W;
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

void save_trace(const std::string& path, const TemperTrace& trace) {
    std::ostringstream out;
    out << "h,rho,cess,ess,resampled,log_evidence_increment,accept_gamma,"
           "z_change_rate,mi,path_u\n";
    for (const TraceRecord& r : trace) {
        out << r.h << ',' << format_double(r.rho) << ',' << format_double(r.cess)
            << ',' << format_double(r.ess) << ',' << (r.resampled ? 1 : 0) << ','
            << format_double(r.log_evidence_increment) << ','
            << format_double(r.accept_gamma) << ','
            << format_double(r.z_change_rate) << ',' << format_double(r.mi) << ','
            << format_double(r.path_u) << '\n';
    }
    write_file(path, out.str());
}

void save_assignment(const std::string& path, const LatentAssignment& z) {
    std::ostringstream out;
    out << "node,block\n";
    for (int i = 0; i < z.n(); ++i)
        out << (i + 1) << ',' << (z.z[i] + 1) << '\n';
    write_file(path, out.str());
}

LatentAssignment load_assignment(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "node,block")
        throw InputError(path + ": header must be node,block");
    LatentAssignment z;
    z.z.resize(static_cast<int>(lines.size()) - 1);
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const std::string where = path + " line " + std::to_string(ln + 1);
        const auto fields = split(lines[ln], ',');
        if (fields.size() != 2) throw InputError(where + ": expected node,block");
        const long node = parse_count(fields[0], where);
        const long block = parse_count(fields[1], where);
        if (node != static_cast<long>(ln))
            throw InputError(where + ": nodes must be listed in order");
        if (block < 1) throw InputError(where + ": blocks are 1-based");
        z.z[ln - 1] = static_cast<int>(block) - 1;
    }
    return z;
}

std::uint64_t fnv1a_file(const std::string& path) {
    const std::string bytes = read_file(path);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

void save_manifest(const std::string& path, const std::string& command,
                   const std::vector<std::string>& args,
                   const std::vector<ManifestEntry>& inputs) {
    json j;
    j["tool"] = "sbmreg";
    j["version"] = "1.0.0";
    j["command"] = command;
    j["args"] = args;
    json in = json::array();
    for (const ManifestEntry& e : inputs)
        in.push_back({{"path", e.path}, {"hash", e.hash}});
    j["inputs"] = std::move(in);
    write_file(path, j.dump(2) + "\n");
}

}  // namespace sbmreg
