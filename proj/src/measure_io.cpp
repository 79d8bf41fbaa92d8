#include "fragtail/measure_io.hpp"

#include "fragtail/errors.hpp"

#include <cmath>
#include <fstream>

namespace fragtail {

namespace {

double number(const nlohmann::json& params, const char* key)
{
    if (!params.contains(key) || !params[key].is_number())
        throw ConfigError(std::string("measure params need numeric '") + key + "'");
    return params[key].get<double>();
}

int integer(const nlohmann::json& params, const char* key)
{
    const double v = number(params, key);
    if (v != std::floor(v))
        throw ConfigError(std::string("measure param '") + key + "' must be an integer");
    return static_cast<int>(v);
}

} // namespace

DislocationSpec measure_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_string())
        throw ConfigError("measure spec needs a string 'family'");
    const std::string family = doc["family"];
    const nlohmann::json params = doc.value("params", nlohmann::json::object());
    const double scale = doc.value("scale", 1.0);

    DislocationSpec spec = [&] {
        if (family == "atomic") {
            if (!params.contains("atoms") || !params["atoms"].is_array())
                throw ConfigError("atomic measure needs params.atoms");
            std::vector<Atom> atoms;
            for (const auto& a : params["atoms"]) {
                Atom atom;
                atom.parts = a.at("parts").get<std::vector<double>>();
                atom.weight = a.at("weight").get<double>();
                atoms.push_back(std::move(atom));
            }
            return DislocationSpec::finite_atomic(std::move(atoms));
        }
        if (family == "identical-k")
            return families::identical_k(integer(params, "k"));
        if (family == "uniform-k")
            return families::uniform_k(integer(params, "k"));
        if (family == "beta")
            return families::beta(number(params, "a"), number(params, "b"));
        if (family == "stable")
            return families::stable(number(params, "gamma"));
        if (family == "ford")
            return families::ford(number(params, "a"));
        if (family == "beta-splitting")
            return families::beta_splitting(number(params, "beta"));
        throw ConfigError("unknown measure family '" + family + "'");
    }();
    return scale == 1.0 ? spec : spec.scaled(scale);
}

DislocationSpec load_measure_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open measure spec '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed measure spec '" + path + "': " + e.what());
    }
    return measure_from_json(doc);
}

nlohmann::json measure_to_json(const DislocationSpec& spec)
{
    nlohmann::json out;
    out["family"] = spec.family_id();
    out["kind"] = to_string(spec.kind());
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : spec.params())
        params[k] = v;
    if (spec.kind() == MeasureKind::finite_atomic && spec.family_id() == "atomic") {
        nlohmann::json atoms = nlohmann::json::array();
        for (const auto& a : spec.atoms())
            atoms.push_back({{"parts", a.parts}, {"weight", a.weight}});
        params["atoms"] = atoms;
    }
    out["params"] = params;
    out["scale"] = spec.scale();
    return out;
}

} // namespace fragtail
