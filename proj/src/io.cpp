#include "reslat/io.hpp"

#include <cstdio>
#include <fstream>

namespace reslat {

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Json to_json(const HypothesisReport& rep) {
    Json j;
    j["nondegenerate"]        = rep.nondegenerate;
    j["margin_unit"]          = rep.margin_unit;
    j["no_nonpositive_real"]  = rep.no_nonpositive_real;
    j["margin_negative_axis"] = rep.margin_negative_axis;
    j["partially_hyperbolic"] = rep.partially_hyperbolic;
    j["distinct_exponents"]   = rep.distinct_exponents;
    j["nonres_weak"]            = rep.nonres_weak;
    j["nonres_strong"]            = rep.nonres_strong;
    j["worst_weak"]             = Json{{"k", rep.worst_weak.k}, {"defect", rep.worst_weak.defect}};
    j["worst_strong"]             = Json{{"k", rep.worst_strong.k}, {"defect", rep.worst_strong.defect}};
    j["k_radius"]             = rep.k_radius;
    j["tol_ell"]              = rep.tol_ell;
    j["tol_res_base"]         = rep.tol_res_base;
    j["cz_convention"]        = rep.cz_convention;
    j["all_required_pass"]    = rep.all_required();
    return j;
}

namespace {

Json cheb_to_json(const ChebFit& f) {
    Json j;
    j["a"] = f.a();
    j["b"] = f.b();
    std::vector<double> c(f.coefficients().data(),
                          f.coefficients().data() + f.coefficients().size());
    j["coef"] = c;
    return j;
}

}  // namespace

Json to_json(const ActionModel& model) {
    Json j;
    j["window"]     = {model.e_min, model.e_max};
    j["rho_c"]      = model.rho_c;
    j["node_count"] = model.node_count;
    j["system"]     = model.system_name;
    j["cz_index"]   = model.cz_index;
    std::vector<std::string> kinds;
    for (Kind k : model.kinds) kinds.push_back(kind_name(k));
    j["kinds"]               = kinds;
    j["fit_residual"]        = model.fit_residual;
    j["action_identity_err"] = model.action_identity_err;
    j["s0"]                  = cheb_to_json(model.s0);
    j["period"]              = cheb_to_json(model.period);
    j["i1"]                  = cheb_to_json(model.i1);
    Json mj = Json::array();
    for (size_t i = 0; i < model.m_re.size(); ++i)
        mj.push_back(Json{{"re", cheb_to_json(model.m_re[i])},
                          {"im", cheb_to_json(model.m_im[i])}});
    j["exponents"] = mj;
    return j;
}

namespace {

ChebFit cheb_from_json(const Json& j) {
    const auto c = j.at("coef").get<std::vector<double>>();
    Vec coef(c.size());
    for (size_t i = 0; i < c.size(); ++i) coef(static_cast<int>(i)) = c[i];
    return ChebFit(j.at("a").get<double>(), j.at("b").get<double>(), std::move(coef));
}

}  // namespace

ActionModel action_model_from_json(const Json& j) {
    ActionModel m;
    try {
        m.e_min       = j.at("window").at(0).get<double>();
        m.e_max       = j.at("window").at(1).get<double>();
        m.rho_c       = j.at("rho_c").get<double>();
        m.node_count  = j.at("node_count").get<int>();
        m.system_name = j.at("system").get<std::string>();
        m.cz_index    = j.at("cz_index").get<int>();
        m.fit_residual        = j.at("fit_residual").get<double>();
        m.action_identity_err = j.at("action_identity_err").get<double>();
        m.s0     = cheb_from_json(j.at("s0"));
        m.period = cheb_from_json(j.at("period"));
        m.i1     = cheb_from_json(j.at("i1"));
        for (const auto& kn : j.at("kinds")) {
            const std::string k = kn.get<std::string>();
            if (k == "ee") m.kinds.push_back(Kind::ee);
            else if (k == "hr") m.kinds.push_back(Kind::hr);
            else if (k == "hc") m.kinds.push_back(Kind::hc);
            else throw ConfigError("action model: unknown kind '" + k + "'");
        }
        for (const auto& e : j.at("exponents")) {
            m.m_re.push_back(cheb_from_json(e.at("re")));
            m.m_im.push_back(cheb_from_json(e.at("im")));
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("action model: malformed JSON: ") + e.what());
    }
    if (m.m_re.size() != m.kinds.size())
        throw ConfigError("action model: kinds and exponent fits disagree");
    return m;
}

Json to_json(const ResonanceLattice& lat) {
    Json j;
    j["system"] = lat.system_name;
    j["h"]      = lat.input.h;
    j["eps0"]   = lat.input.eps0;
    j["delta"]  = lat.input.delta;
    j["window"] = {lat.window_lo, lat.window_hi};
    Json rows   = Json::array();
    for (const auto& r : lat.resonances)
        rows.push_back(Json{{"m", r.m},
                            {"k", r.k},
                            {"re_e", r.e.real()},
                            {"im_e", r.e.imag()},
                            {"residual", r.residual},
                            {"iters", r.iters}});
    j["resonances"] = rows;
    Json fails      = Json::array();
    for (const auto& f : lat.failures)
        fails.push_back(Json{{"m", f.m}, {"k", f.k}, {"reason", f.reason}});
    j["failures"] = fails;
    return j;
}

std::string lattice_csv(const ResonanceLattice& lat) {
    const int d = lat.resonances.empty()
                      ? (lat.failures.empty() ? 0 : static_cast<int>(lat.failures[0].k.size()))
                      : static_cast<int>(lat.resonances[0].k.size());
    std::string out = "m";
    for (int j = 0; j < d; ++j) out += ",k" + std::to_string(j + 1);
    out += ",re_e,im_e,residual,iters\n";
    for (const auto& r : lat.resonances) {
        out += std::to_string(r.m);
        for (int kj : r.k) out += "," + std::to_string(kj);
        out += "," + fmt17(r.e.real());
        out += "," + fmt17(r.e.imag());
        out += "," + fmt17(r.residual);
        out += "," + std::to_string(r.iters);
        out += "\n";
    }
    return out;
}

std::string plotdata_csv(const std::vector<ResonanceLattice>& lattices) {
    std::string out = "h,re_e,im_e\n";
    for (const auto& lat : lattices)
        for (const auto& r : lat.resonances) {
            out += fmt17(lat.input.h);
            out += "," + fmt17(r.e.real());
            out += "," + fmt17(r.e.imag());
            out += "\n";
        }
    return out;
}

void emit_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw NumericalError("emit_file: cannot open " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw NumericalError("emit_file: short write to " + path.string());
}

}  // namespace reslat
