#include <fstream>
#include <sstream>

#include "json.hpp"
#include "knotloop/errors.hpp"
#include "knotloop/triangulation.hpp"

namespace knotloop {

namespace {

using nlohmann::json;

int as_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw SchemaError(what + ": expected an integer");
    return v.get<int>();
}

std::vector<int> int_vector(const json& v, int n, const std::string& what) {
    if (!v.is_array() || int(v.size()) != n) throw SchemaError(what + ": expected an array of " + std::to_string(n) + " integers");
    std::vector<int> out;
    for (const auto& x : v) out.push_back(as_int(x, what));
    return out;
}

IntMatrix int_matrix(const json& v, int n, const std::string& what) {
    if (!v.is_array() || int(v.size()) != n) throw SchemaError(what + ": expected " + std::to_string(n) + " rows");
    IntMatrix m;
    for (size_t i = 0; i < v.size(); ++i) m.push_back(int_vector(v[i], n, what + " row " + std::to_string(i)));
    return m;
}

const json& field(const json& obj, const char* key) {
    if (!obj.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return obj.at(key);
}

}  // namespace

GluingFile parse_gluing_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("gluing data must be a JSON object");
    GluingFile g;
    GluingData& gd = g.data;
    gd.N = as_int(field(j, "N"), "N");
    if (gd.N < 1) throw SchemaError("N must be positive");
    gd.G = int_matrix(field(j, "G"), gd.N, "G");
    gd.Gp = int_matrix(field(j, "Gp"), gd.N, "Gp");
    gd.Gpp = int_matrix(field(j, "Gpp"), gd.N, "Gpp");
    const json& mer = field(j, "meridian");
    if (!mer.is_object()) throw SchemaError("meridian must be an object");
    gd.C = int_vector(field(mer, "C"), gd.N, "meridian.C");
    gd.Cp = int_vector(field(mer, "Cp"), gd.N, "meridian.Cp");
    gd.Cpp = int_vector(field(mer, "Cpp"), gd.N, "meridian.Cpp");
    gd.replaced_row = gd.N - 1;
    if (j.contains("shapes")) {
        const json& s = j.at("shapes");
        if (!s.is_array() || int(s.size()) != gd.N) throw SchemaError("shapes: expected N entries");
        for (const auto& z : s) {
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                throw SchemaError("shapes: each entry must be [re, im]");
            g.shapes.emplace_back(z[0].get<double>(), z[1].get<double>());
        }
    }
    if (j.contains("flattening")) {
        const json& f = j.at("flattening");
        if (!f.is_object()) throw SchemaError("flattening must be an object");
        g.has_flattening = true;
        g.flattening.f = int_vector(field(f, "f"), gd.N, "flattening.f");
        g.flattening.fp = int_vector(field(f, "fp"), gd.N, "flattening.fp");
        g.flattening.fpp = int_vector(field(f, "fpp"), gd.N, "flattening.fpp");
    }
    return g;
}

GluingFile read_gluing_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_gluing_json(ss.str());
}

std::string gluing_to_json(const GluingFile& g) {
    const GluingData& gd = g.data;
    json j;
    j["N"] = gd.N;
    j["G"] = gd.G;
    j["Gp"] = gd.Gp;
    j["Gpp"] = gd.Gpp;
    j["meridian"] = {{"C", gd.C}, {"Cp", gd.Cp}, {"Cpp", gd.Cpp}};
    if (!g.shapes.empty()) {
        json s = json::array();
        for (const cplx& z : g.shapes) s.push_back({z.real(), z.imag()});
        j["shapes"] = s;
    }
    if (g.has_flattening) j["flattening"] = {{"f", g.flattening.f}, {"fp", g.flattening.fp}, {"fpp", g.flattening.fpp}};
    return j.dump(2);
}

}  // namespace knotloop
