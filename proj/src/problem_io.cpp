#include "maavi/problem_io.hpp"

#include <fstream>
#include <sstream>

using nlohmann::json;

namespace maavi {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ProblemFileError("field '" + path + "': " + msg);
}

const json& require(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end())
        fail(key, "missing");
    return *it;
}

std::size_t as_index(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        fail(path, "expected a nonnegative integer, got " + j.dump());
    return j.get<std::size_t>();
}

double as_real(const json& j, const std::string& path) {
    if (!j.is_number())
        fail(path, "expected a number, got " + j.dump());
    return j.get<double>();
}

const json& as_array(const json& j, const std::string& path, std::optional<std::size_t> size = std::nullopt) {
    if (!j.is_array())
        fail(path, "expected an array");
    if (size && j.size() != *size)
        fail(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
    return j;
}

std::string at(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

// Pairs [y, value] from one control's transition or cost list.
std::vector<std::pair<StateId, double>> read_pairs(const json& list, const std::string& path) {
    std::vector<std::pair<StateId, double>> out;
    for (std::size_t i = 0; i < as_array(list, path).size(); ++i) {
        const auto p = at(path, i);
        const json& pair = as_array(list[i], p, 2);
        out.emplace_back(as_index(pair[0], p + "[0]"), as_real(pair[1], p + "[1]"));
    }
    return out;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        line += text[i] == '\n';
    return line;
}

} // namespace

ModelValidationError::ModelValidationError(PropertyReport report)
    : Error([&] {
          std::string msg = "model failed validation";
          for (const auto& v : report.violations)
              msg += "\n  state " + std::to_string(v.state) + ": " + v.detail;
          return msg;
      }()),
      report_(std::move(report)) {}

TabularMdp problem_from_json(const json& doc, const LoadOptions& opts) {
    if (!doc.is_object())
        throw ProblemFileError("problem file must contain a JSON object");
    const std::string kind_name = [&] {
        const json& k = require(doc, "kind");
        if (!k.is_string())
            fail("kind", "expected a string");
        return k.get<std::string>();
    }();
    TabularMdp::Data data;
    if (kind_name == "discounted")
        data.kind = ProblemKind::Discounted;
    else if (kind_name == "ssp")
        data.kind = ProblemKind::Ssp;
    else
        fail("kind", "expected \"discounted\" or \"ssp\", got \"" + kind_name + "\"");

    const std::size_t n = as_index(require(doc, "num_states"), "num_states");
    if (n == 0)
        fail("num_states", "must be at least 1");
    data.num_agents = as_index(require(doc, "num_agents"), "num_agents");
    if (data.num_agents == 0)
        fail("num_agents", "must be at least 1");

    if (data.kind == ProblemKind::Discounted) {
        data.discount = as_real(require(doc, "discount"), "discount");
    } else {
        data.discount = 1.0;
        if (!doc.contains("destination"))
            fail("destination", "required for kind \"ssp\"");
        data.destination = as_index(doc["destination"], "destination");
        if (*data.destination >= n)
            fail("destination", "state " + std::to_string(*data.destination) + " out of range");
    }

    const json& controls = as_array(require(doc, "controls"), "controls", n);
    const json& transitions = as_array(require(doc, "transitions"), "transitions", n);
    const json* costs = doc.contains("costs") ? &as_array(doc["costs"], "costs", n) : nullptr;

    data.controls.resize(n);
    data.rows.resize(n);
    for (StateId x = 0; x < n; ++x) {
        const auto cpath = at("controls", x);
        for (std::size_t c = 0; c < as_array(controls[x], cpath).size(); ++c) {
            const auto tpath = at(cpath, c);
            ControlTuple u;
            for (std::size_t i = 0; i < as_array(controls[x][c], tpath).size(); ++i) {
                const json& v = controls[x][c][i];
                if (!v.is_number_integer())
                    fail(at(tpath, i), "expected an integer component code");
                u.push_back(v.get<int>());
            }
            data.controls[x].push_back(std::move(u));
        }
        const std::size_t count = data.controls[x].size();
        const auto ppath = at("transitions", x);
        as_array(transitions[x], ppath, count);
        if (costs)
            as_array((*costs)[x], at("costs", x), count);

        for (std::size_t c = 0; c < count; ++c) {
            const auto row_path = at(ppath, c);
            std::vector<TabularMdp::Entry> row;
            for (auto [y, p] : read_pairs(transitions[x][c], row_path)) {
                if (y >= n)
                    fail(row_path, "successor " + std::to_string(y) + " out of range");
                row.push_back({y, p, 0.0});
            }
            if (costs) {
                const auto gpath = at(at("costs", x), c);
                for (auto [y, g] : read_pairs((*costs)[x][c], gpath)) {
                    if (y >= n)
                        fail(gpath, "successor " + std::to_string(y) + " out of range");
                    for (auto& e : row) {
                        if (e.next == y)
                            e.cost = g;
                    }
                }
            }
            if (opts.renormalize) {
                double sum = 0.0;
                for (const auto& e : row)
                    sum += e.prob;
                if (sum > 0.0) {
                    for (auto& e : row)
                        e.prob /= sum;
                }
            }
            data.rows[x].push_back(std::move(row));
        }
    }

    TabularMdp model(std::move(data));
    PropertyReport report = validate_model(model, opts.policy_cap);
    if (!report.passed)
        throw ModelValidationError(std::move(report));
    if (model.kind() == ProblemKind::Ssp) {
        SspWeights w = ssp_weights(model, opts.policy_cap);
        model.attach_ssp_weights(std::move(w.weights), w.modulus);
    }
    return model;
}

TabularMdp parse_problem(const std::string& text, const LoadOptions& opts) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ProblemFileError("parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    return problem_from_json(doc, opts);
}

TabularMdp load_problem(const std::filesystem::path& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in)
        throw ProblemFileError("cannot open problem file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_problem(buf.str(), opts);
    } catch (const ProblemFileError& e) {
        throw ProblemFileError(path.string() + ": " + e.what());
    }
}

json problem_to_json(const TabularMdp& model) {
    const auto& d = model.data();
    json doc;
    doc["kind"] = to_string(d.kind);
    doc["num_states"] = model.num_states();
    doc["num_agents"] = model.num_agents();
    if (d.kind == ProblemKind::Discounted)
        doc["discount"] = d.discount;
    else
        doc["destination"] = *d.destination;
    json controls = json::array(), transitions = json::array(), costs = json::array();
    for (StateId x = 0; x < model.num_states(); ++x) {
        json cs = json::array(), ts = json::array(), gs = json::array();
        for (std::size_t c = 0; c < d.controls[x].size(); ++c) {
            cs.push_back(d.controls[x][c]);
            json t = json::array(), g = json::array();
            for (const auto& e : d.rows[x][c]) {
                t.push_back({e.next, e.prob});
                if (e.cost != 0.0)
                    g.push_back({e.next, e.cost});
            }
            ts.push_back(std::move(t));
            gs.push_back(std::move(g));
        }
        controls.push_back(std::move(cs));
        transitions.push_back(std::move(ts));
        costs.push_back(std::move(gs));
    }
    doc["controls"] = std::move(controls);
    doc["transitions"] = std::move(transitions);
    doc["costs"] = std::move(costs);
    return doc;
}

void save_problem(const TabularMdp& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write problem file " + path.string());
    out << problem_to_json(model).dump(1) << '\n';
}

Policy policy_from_json(const Model& model, const json& doc) {
    const std::size_t n = model.num_states();
    Policy mu(std::vector<std::size_t>(n, 0));
    if (doc.contains("policy")) {
        const json& list = as_array(doc["policy"], "policy", n);
        for (StateId x = 0; x < n; ++x)
            mu[x] = as_index(list[x], at("policy", x));
    } else if (doc.contains("controls")) {
        const json& list = as_array(doc["controls"], "controls", n);
        for (StateId x = 0; x < n; ++x) {
            ControlTuple u;
            for (const json& v : as_array(list[x], at("controls", x)))
                u.push_back(v.get<int>());
            auto idx = model.find_control(x, u);
            if (!idx)
                throw FeasibilityError(x, "control " + to_string(u) + " is not in U(x)");
            mu[x] = *idx;
        }
    } else {
        throw ProblemFileError("policy file needs a \"policy\" or \"controls\" field");
    }
    model.require_feasible(mu);
    return mu;
}

Policy load_policy(const Model& model, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ProblemFileError("cannot open policy file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ProblemFileError(path.string() + ": " + e.what());
    }
    return policy_from_json(model, doc);
}

json policy_to_json(const Model& model, const Policy& mu) {
    json controls = json::array();
    for (StateId x = 0; x < mu.size(); ++x)
        controls.push_back(model.control(x, mu[x]));
    return {{"policy", mu.choice}, {"controls", std::move(controls)}};
}

} // namespace maavi
