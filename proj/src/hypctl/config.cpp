#include "hypctl/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace hypctl {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_sections(const std::string& text) {
    std::map<std::string, Section> sections;
    std::istringstream in(text);
    std::string line, current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            current = trim(line.substr(1, line.size() - 2));
            sections[current];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (current.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!sections[current].emplace(key, value).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return sections;
}

std::vector<double> parse_floats(const std::string& value, const std::string& where) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) {
        // allow comma separated lists
        for (auto& c : tok)
            if (c == ',')
                c = ' ';
        std::istringstream tin(tok);
        double v;
        while (tin >> v)
            out.push_back(v);
        if (!tin.eof())
            throw ConfigError(where + ": bad number '" + tok + "'");
    }
    return out;
}

Complex parse_complex(std::string tok, const std::string& where) {
    // forms: "a", "a+bi", "a-bi"
    if (tok.empty())
        throw ConfigError(where + ": empty pole token");
    if (tok.back() != 'i' && tok.back() != 'I') {
        try {
            return Complex(std::stod(tok), 0.0);
        } catch (...) {
            throw ConfigError(where + ": bad pole '" + tok + "'");
        }
    }
    tok.pop_back();
    size_t split = tok.find_last_of("+-");
    if (split == std::string::npos || split == 0)
        throw ConfigError(where + ": bad complex pole, use a+bi");
    try {
        double re = std::stod(tok.substr(0, split));
        double im = std::stod(tok.substr(split)); // keeps the sign
        return Complex(re, im);
    } catch (...) {
        throw ConfigError(where + ": bad complex pole '" + tok + "i'");
    }
}

ScalarFunction parse_entry(const std::string& value, const std::string& where) {
    const std::string tab = "table:";
    if (value.rfind(tab, 0) == 0)
        return ScalarFunction::from_samples(parse_floats(value.substr(tab.size()), where));
    try {
        return ScalarFunction::from_expression(value);
    } catch (const expr::ParseError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

class SectionReader {
public:
    SectionReader(const std::map<std::string, Section>& all, const std::string& name)
        : name_(name) {
        auto it = all.find(name);
        section_ = it == all.end() ? nullptr : &it->second;
    }

    bool has(const std::string& key) const {
        return section_ && section_->count(key) > 0;
    }

    std::string raw(const std::string& key) const {
        if (!has(key))
            throw ConfigError("[" + name_ + "] missing key '" + key + "'");
        return section_->at(key);
    }

    std::string raw_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? section_->at(key) : fallback;
    }

    int integer(const std::string& key) const {
        try {
            return std::stoi(raw(key));
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            throw ConfigError("[" + name_ + "] " + key + ": expected integer");
        }
    }

    int integer_or(const std::string& key, int fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    uint64_t unsigned64_or(const std::string& key, uint64_t fallback) const {
        if (!has(key))
            return fallback;
        try {
            return std::stoull(raw(key));
        } catch (...) {
            throw ConfigError("[" + name_ + "] " + key + ": expected unsigned integer");
        }
    }

    double number_or(const std::string& key, double fallback) const {
        if (!has(key))
            return fallback;
        try {
            return std::stod(raw(key));
        } catch (...) {
            throw ConfigError("[" + name_ + "] " + key + ": expected number");
        }
    }

    Matrix matrix(const std::string& key, int rows, int cols) const {
        auto vals = parse_floats(raw(key), "[" + name_ + "] " + key);
        if (static_cast<int>(vals.size()) != rows * cols)
            throw ConfigError("[" + name_ + "] " + key + ": expected " +
                              std::to_string(rows * cols) + " values, got " +
                              std::to_string(vals.size()));
        Matrix M(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                M(i, j) = vals[i * cols + j];
        return M;
    }

    Vector vector_or_zero(const std::string& key, int size) const {
        if (!has(key))
            return Vector::Zero(size);
        auto vals = parse_floats(raw(key), "[" + name_ + "] " + key);
        if (static_cast<int>(vals.size()) != size)
            throw ConfigError("[" + name_ + "] " + key + ": expected " + std::to_string(size) +
                              " values");
        return Eigen::Map<const Vector>(vals.data(), size);
    }

    const Section* section_ptr() const { return section_; }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    const Section* section_ = nullptr;
};

std::vector<Complex> parse_poles(const std::string& value, const std::string& where) {
    std::vector<Complex> poles;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) {
        if (!tok.empty() && tok.back() == ',')
            tok.pop_back();
        if (!tok.empty())
            poles.push_back(parse_complex(tok, where));
    }
    return poles;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_matrix(const Matrix& M) {
    std::string out;
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) {
            if (!out.empty())
                out += ' ';
            out += format_double(M(i, j));
        }
    return out;
}

std::string format_entry(const ScalarFunction& f) {
    if (f.is_expression())
        return f.expression_text();
    std::string out = "table:";
    for (double v : f.samples())
        out += ' ' + format_double(v);
    return out;
}

bool entry_is_zero_constant(const ScalarFunction& f) {
    return f.is_expression() && f.expression_text() == "0";
}

// Artificial BC keys: <prefix><i><j>, 1-based, e.g. ctrl_l21.
void read_artificial(const SectionReader& sec, const std::string& prefix, ScalarMatrix& target) {
    for (int i = 0; i < target.rows(); ++i)
        for (int j = 0; j < target.cols(); ++j) {
            std::string key = prefix + std::to_string(i + 1) + std::to_string(j + 1);
            if (sec.has(key))
                target(i, j) = parse_entry(sec.raw(key), key);
        }
}

} // namespace

ProblemConfig parse_config(const std::string& text) {
    auto sections = parse_sections(text);
    ProblemConfig cfg;
    PlantSpec& plant = cfg.plant;

    SectionReader dims(sections, "dimensions");
    plant.n = dims.integer("n");
    plant.p = dims.integer("p");
    plant.m = dims.integer("m");
    plant.n_xi = dims.integer("n_xi");
    if (plant.n <= 0 || plant.p <= 0 || plant.m <= 0 || plant.n_xi <= 0 ||
        plant.p + plant.m != plant.n)
        throw ConfigError("[dimensions] need positive n, p, m, n_xi with p + m = n");

    SectionReader lam(sections, "lambda");
    plant.lambda.resize(plant.n);
    for (int i = 0; i < plant.n; ++i) {
        std::string key = "lambda" + std::to_string(i + 1);
        plant.lambda[i] = parse_entry(lam.raw(key), key);
    }

    plant.A = ScalarMatrix(plant.n, plant.n);
    SectionReader asec(sections, "A");
    for (int i = 0; i < plant.n; ++i)
        for (int j = 0; j < plant.n; ++j) {
            std::string key = "A" + std::to_string(i + 1) + std::to_string(j + 1);
            if (asec.has(key))
                plant.A(i, j) = parse_entry(asec.raw(key), key);
        }

    plant.C1 = ScalarMatrix(plant.n, plant.n_xi);
    SectionReader c1(sections, "C1");
    for (int i = 0; i < plant.n; ++i)
        for (int j = 0; j < plant.n_xi; ++j) {
            std::string key = "C1" + std::to_string(i + 1) + std::to_string(j + 1);
            if (c1.has(key))
                plant.C1(i, j) = parse_entry(c1.raw(key), key);
        }

    SectionReader bnd(sections, "boundary");
    plant.Q0 = bnd.matrix("Q0", plant.m, plant.p);
    plant.Q1 = bnd.matrix("Q1", plant.p, plant.m);
    plant.C2 = bnd.matrix("C2", plant.m, plant.n_xi);

    SectionReader ode(sections, "ode");
    plant.F = ode.matrix("F", plant.n_xi, plant.n_xi);
    plant.B = ode.matrix("B", plant.n_xi, plant.p);

    SectionReader des(sections, "design");
    cfg.design.controller_poles =
        parse_poles(des.raw("controller_poles"), "controller_poles");
    cfg.design.observer_poles = parse_poles(des.raw("observer_poles"), "observer_poles");
    if (static_cast<int>(cfg.design.controller_poles.size()) != plant.n_xi ||
        static_cast<int>(cfg.design.observer_poles.size()) != plant.n_xi)
        throw ConfigError("[design] pole lists must have n_xi entries");
    cfg.design.grid_N = des.integer_or("N", 200);
    if (cfg.design.grid_N < 16)
        throw ConfigError("[design] N must be at least 16");
    cfg.design.kernel_tol = des.number_or("kernel_tol", 1e-10);
    cfg.design.kernel_max_iters = des.integer_or("kernel_max_iters", 200);
    cfg.design.seed = des.unsigned64_or("seed", 1);
    cfg.design.controller_bc = ArtificialBC(plant.p, plant.m);
    cfg.design.observer_bc = ArtificialBC(plant.p, plant.m);
    read_artificial(des, "ctrl_l", cfg.design.controller_bc.l);
    read_artificial(des, "ctrl_m", cfg.design.controller_bc.m);
    read_artificial(des, "ctrl_n", cfg.design.controller_bc.n);
    read_artificial(des, "obs_l", cfg.design.observer_bc.l);
    read_artificial(des, "obs_m", cfg.design.observer_bc.m);
    read_artificial(des, "obs_n", cfg.design.observer_bc.n);

    SectionReader sim(sections, "simulation");
    cfg.sim.cfl = sim.number_or("cfl", 0.9);
    if (!(cfg.sim.cfl > 0.0 && cfg.sim.cfl <= 1.0))
        throw ConfigError("[simulation] cfl must lie in (0, 1]");
    cfg.sim.t_final = sim.number_or("t_final", 6.0);
    if (cfg.sim.t_final <= 0.0)
        throw ConfigError("[simulation] t_final must be positive");
    cfg.sim.output_decimation = sim.integer_or("output_decimation", 5);
    cfg.sim.x0.assign(plant.n, ScalarFunction::constant(0.0));
    cfg.sim.xhat0.assign(plant.n, ScalarFunction::constant(0.0));
    for (int i = 0; i < plant.n; ++i) {
        std::string k0 = "x0_" + std::to_string(i + 1);
        std::string kh = "xhat0_" + std::to_string(i + 1);
        if (sim.has(k0))
            cfg.sim.x0[i] = parse_entry(sim.raw(k0), k0);
        if (sim.has(kh))
            cfg.sim.xhat0[i] = parse_entry(sim.raw(kh), kh);
    }
    cfg.sim.xi0 = sim.vector_or_zero("xi0", plant.n_xi);
    cfg.sim.xihat0 = sim.vector_or_zero("xihat0", plant.n_xi);

    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_string(const ProblemConfig& cfg) {
    const PlantSpec& plant = cfg.plant;
    std::ostringstream os;
    os << "[dimensions]\n"
       << "n = " << plant.n << "\np = " << plant.p << "\nm = " << plant.m
       << "\nn_xi = " << plant.n_xi << "\n\n";

    os << "[lambda]\n";
    for (int i = 0; i < plant.n; ++i)
        os << "lambda" << i + 1 << " = " << format_entry(plant.lambda[i]) << "\n";

    os << "\n[A]\n";
    for (int i = 0; i < plant.n; ++i)
        for (int j = 0; j < plant.n; ++j)
            if (!entry_is_zero_constant(plant.A(i, j)))
                os << "A" << i + 1 << j + 1 << " = " << format_entry(plant.A(i, j)) << "\n";

    os << "\n[C1]\n";
    for (int i = 0; i < plant.n; ++i)
        for (int j = 0; j < plant.n_xi; ++j)
            if (!entry_is_zero_constant(plant.C1(i, j)))
                os << "C1" << i + 1 << j + 1 << " = " << format_entry(plant.C1(i, j)) << "\n";

    os << "\n[boundary]\n"
       << "Q0 = " << format_matrix(plant.Q0) << "\n"
       << "Q1 = " << format_matrix(plant.Q1) << "\n"
       << "C2 = " << format_matrix(plant.C2) << "\n";

    os << "\n[ode]\n"
       << "F = " << format_matrix(plant.F) << "\n"
       << "B = " << format_matrix(plant.B) << "\n";

    os << "\n[design]\n";
    auto pole_list = [&](const std::vector<Complex>& poles) {
        std::string out;
        for (const Complex& c : poles) {
            if (!out.empty())
                out += ' ';
            if (c.imag() == 0.0)
                out += format_double(c.real());
            else
                out += format_double(c.real()) + (c.imag() >= 0 ? "+" : "") +
                       format_double(c.imag()) + "i";
        }
        return out;
    };
    os << "controller_poles = " << pole_list(cfg.design.controller_poles) << "\n"
       << "observer_poles = " << pole_list(cfg.design.observer_poles) << "\n"
       << "N = " << cfg.design.grid_N << "\n"
       << "kernel_tol = " << format_double(cfg.design.kernel_tol) << "\n"
       << "kernel_max_iters = " << cfg.design.kernel_max_iters << "\n"
       << "seed = " << cfg.design.seed << "\n";
    auto write_artificial = [&](const std::string& prefix, const ScalarMatrix& M) {
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j)
                if (!entry_is_zero_constant(M(i, j)))
                    os << prefix << i + 1 << j + 1 << " = " << format_entry(M(i, j)) << "\n";
    };
    write_artificial("ctrl_l", cfg.design.controller_bc.l);
    write_artificial("ctrl_m", cfg.design.controller_bc.m);
    write_artificial("ctrl_n", cfg.design.controller_bc.n);
    write_artificial("obs_l", cfg.design.observer_bc.l);
    write_artificial("obs_m", cfg.design.observer_bc.m);
    write_artificial("obs_n", cfg.design.observer_bc.n);

    os << "\n[simulation]\n"
       << "cfl = " << format_double(cfg.sim.cfl) << "\n"
       << "t_final = " << format_double(cfg.sim.t_final) << "\n"
       << "output_decimation = " << cfg.sim.output_decimation << "\n";
    for (size_t i = 0; i < cfg.sim.x0.size(); ++i)
        os << "x0_" << i + 1 << " = " << format_entry(cfg.sim.x0[i]) << "\n";
    for (size_t i = 0; i < cfg.sim.xhat0.size(); ++i)
        os << "xhat0_" << i + 1 << " = " << format_entry(cfg.sim.xhat0[i]) << "\n";
    if (cfg.sim.xi0.size())
        os << "xi0 = " << format_matrix(cfg.sim.xi0.transpose()) << "\n";
    if (cfg.sim.xihat0.size())
        os << "xihat0 = " << format_matrix(cfg.sim.xihat0.transpose()) << "\n";
    return os.str();
}

void save_config(const std::string& path, const ProblemConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write config file: " + path);
    out << config_to_string(cfg);
}

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace hypctl
