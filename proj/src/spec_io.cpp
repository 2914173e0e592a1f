#include "droopstab/spec_io.hpp"

#include "droopstab/errors.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace droopstab {
namespace {

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required) {
    if (!obj.is_object()) throw ParseError(path + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key())) throw ParseError(path + ": unknown key '" + item.key() + "'");
    }
    for (const char* key : required) {
        if (!obj.contains(key)) throw ParseError(path + ": missing key '" + key + "'");
    }
}

double number(const Json& obj, const char* key, const std::string& path) {
    const Json& v = obj.at(key);
    if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
    return v.get<double>();
}

std::string bus_name(const Json& obj, const char* key, const std::string& path) {
    const Json& v = obj.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ParseError(path + "." + key + ": expected a bus name");
}

const Json& array(const Json& obj, const char* key) {
    const Json& v = obj.at(key);
    if (!v.is_array()) throw ParseError(std::string(key) + ": expected an array");
    return v;
}

Vector vec(const Json& obj, const char* key, int size) {
    const Json& v = obj.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != size) {
        throw ParseError(std::string(key) + ": expected an array of length " + std::to_string(size));
    }
    Vector out(size);
    for (int i = 0; i < size; ++i) {
        if (!v[static_cast<size_t>(i)].is_number()) {
            throw ParseError(std::string(key) + ": expected numbers");
        }
        out(i) = v[static_cast<size_t>(i)].get<double>();
    }
    return out;
}

Json to_array(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

GridSpec spec_from_json(const Json& j) {
    check_keys(j, "$", {"description", "bases", "feeder", "inverters", "lines", "loads"},
               {"bases", "feeder", "inverters", "lines"});
    GridSpec s;

    const Json& b = j.at("bases");
    check_keys(b, "bases", {"V_b", "S_b", "omega_b"}, {"V_b", "S_b", "omega_b"});
    s.bases.v_b = number(b, "V_b", "bases");
    s.bases.s_b = number(b, "S_b", "bases");
    s.bases.omega_b = number(b, "omega_b", "bases");

    const Json& f = j.at("feeder");
    check_keys(f, "feeder", {"bus", "V_gD", "V_gQ"}, {"V_gD", "V_gQ"});
    if (f.contains("bus")) s.feeder.bus = bus_name(f, "bus", "feeder");
    s.feeder.v_d = number(f, "V_gD", "feeder");
    s.feeder.v_q = number(f, "V_gQ", "feeder");

    const Json& invs = array(j, "inverters");
    for (size_t i = 0; i < invs.size(); ++i) {
        const std::string p = "inverters[" + std::to_string(i) + "]";
        const Json& e = invs[i];
        check_keys(e, p, {"bus", "k_p", "k_q", "T_p", "T_q", "omega_d", "V_d", "P_d", "Q_d"},
                   {"bus", "k_p", "k_q", "T_p", "T_q", "omega_d", "V_d", "P_d", "Q_d"});
        InverterSpec inv;
        inv.bus = bus_name(e, "bus", p);
        inv.kp = number(e, "k_p", p);
        inv.kq = number(e, "k_q", p);
        inv.tp = number(e, "T_p", p);
        inv.tq = number(e, "T_q", p);
        inv.omega_d = number(e, "omega_d", p);
        inv.v_d = number(e, "V_d", p);
        inv.p_d = number(e, "P_d", p);
        inv.q_d = number(e, "Q_d", p);
        s.inverters.push_back(inv);
    }

    const Json& lines = array(j, "lines");
    for (size_t i = 0; i < lines.size(); ++i) {
        const std::string p = "lines[" + std::to_string(i) + "]";
        const Json& e = lines[i];
        check_keys(e, p, {"from_bus", "to_bus", "R_pu", "X_pu", "L_pu"},
                   {"from_bus", "to_bus", "R_pu", "X_pu", "L_pu"});
        s.lines.push_back({bus_name(e, "from_bus", p), bus_name(e, "to_bus", p),
                           number(e, "R_pu", p), number(e, "X_pu", p), number(e, "L_pu", p)});
    }

    if (j.contains("loads")) {
        const Json& loads = array(j, "loads");
        for (size_t i = 0; i < loads.size(); ++i) {
            const std::string p = "loads[" + std::to_string(i) + "]";
            const Json& e = loads[i];
            check_keys(e, p, {"bus", "R_L_pu", "X_L_pu"}, {"bus", "R_L_pu", "X_L_pu"});
            s.loads.push_back(
                {bus_name(e, "bus", p), number(e, "R_L_pu", p), number(e, "X_L_pu", p)});
        }
    }
    validate(s);
    return s;
}

GridSpec parse_spec(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return spec_from_json(j);
}

GridSpec load_spec(const std::string& path) { return parse_spec(slurp(path)); }

Json spec_to_json(const GridSpec& s) {
    Json j;
    j["bases"] = {{"V_b", s.bases.v_b}, {"S_b", s.bases.s_b}, {"omega_b", s.bases.omega_b}};
    j["feeder"] = {{"bus", s.feeder.bus}, {"V_gD", s.feeder.v_d}, {"V_gQ", s.feeder.v_q}};
    j["inverters"] = Json::array();
    for (const auto& i : s.inverters) {
        j["inverters"].push_back({{"bus", i.bus},
                                  {"k_p", i.kp},
                                  {"k_q", i.kq},
                                  {"T_p", i.tp},
                                  {"T_q", i.tq},
                                  {"omega_d", i.omega_d},
                                  {"V_d", i.v_d},
                                  {"P_d", i.p_d},
                                  {"Q_d", i.q_d}});
    }
    j["lines"] = Json::array();
    for (const auto& l : s.lines) {
        j["lines"].push_back({{"from_bus", l.from_bus},
                              {"to_bus", l.to_bus},
                              {"R_pu", l.r},
                              {"X_pu", l.x},
                              {"L_pu", l.l}});
    }
    j["loads"] = Json::array();
    for (const auto& l : s.loads) {
        j["loads"].push_back({{"bus", l.bus}, {"R_L_pu", l.r}, {"X_L_pu", l.x}});
    }
    return j;
}

void save_spec(const std::string& path, const GridSpec& spec) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << spec_to_json(spec).dump(2) << '\n';
}

Json equilibrium_to_json(const EquilibriumResult& eq, std::uint64_t spec_hash) {
    Json j;
    j["spec_hash"] = spec_hash;
    j["delta"] = to_array(eq.point.delta);
    j["omega"] = to_array(eq.point.omega);
    j["V"] = to_array(eq.point.voltage);
    j["I_D"] = to_array(eq.point.i_d);
    j["I_Q"] = to_array(eq.point.i_q);
    j["residual_norm"] = eq.residual_norm;
    j["field_norm"] = eq.field_norm;
    j["iterations"] = eq.iterations;
    j["converged"] = eq.converged;
    return j;
}

OperatingPoint equilibrium_from_json(const Json& j, int n, int m) {
    check_keys(j, "$",
               {"spec_hash", "delta", "omega", "V", "I_D", "I_Q", "residual_norm", "field_norm",
                "iterations", "converged"},
               {"delta", "omega", "V", "I_D", "I_Q"});
    OperatingPoint x;
    x.delta = vec(j, "delta", n);
    x.omega = vec(j, "omega", n);
    x.voltage = vec(j, "V", n);
    x.i_d = vec(j, "I_D", m);
    x.i_q = vec(j, "I_Q", m);
    return x;
}

OperatingPoint load_equilibrium(const std::string& path, int n, int m) {
    Json j;
    try {
        j = Json::parse(slurp(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return equilibrium_from_json(j, n, m);
}

}  // namespace droopstab
