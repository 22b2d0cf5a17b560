#include "kp/export.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "kp/errors.hpp"

namespace kp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

void check_exportable(const MilpModel& model) {
    bool any = model.objective_constant != 0.0;
    for (double c : model.objective) {
        if (std::abs(c) > 1e300 || !std::isfinite(c))
            throw ConfigError("objective coefficient magnitude exceeds 1e300");
        if (c != 0.0) any = true;
    }
    if (!any) throw ConfigError("no objective terms");
}

void append_metadata(std::ostringstream& out, const MilpModel& model, const char* comment) {
    out << comment << " kpfl model export\n";
    out << comment << " kind=" << to_string(model.kind) << " k=" << model.k << "\n";
    if (model.params) {
        out << comment << " epsilon=" << num(model.params->epsilon)
            << " alpha=" << num(model.params->alpha) << " kappa=" << num(model.params->kappa)
            << "\n";
    }
    out << comment << " coeff_range " << num(model.coeff_min) << " " << num(model.coeff_max)
        << "\n";
    out << comment << " columns x=" << model.counts.x << " y=" << model.counts.y
        << " aux=" << model.counts.aux << "\n";
}

const char* rel_text(Relation r) {
    switch (r) {
        case Relation::le: return "<=";
        case Relation::eq: return "=";
        case Relation::ge: return ">=";
    }
    return "?";
}

}  // namespace

ModelFormat model_format_from_string(const std::string& s) {
    if (s == "lp") return ModelFormat::lp;
    if (s == "mps") return ModelFormat::mps;
    throw ConfigError("unknown export format '" + s + "' (expected lp or mps)");
}

std::string write_lp(const MilpModel& model) {
    check_exportable(model);
    std::ostringstream out;
    append_metadata(out, model, "\\");
    out << "Minimize\n obj:";
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        const double c = model.objective[i];
        if (c == 0.0) continue;
        out << (c < 0 ? " - " : " + ") << num(std::abs(c)) << " " << model.vars[i].name;
    }
    if (model.objective_constant != 0.0) {
        const double c = model.objective_constant;
        out << (c < 0 ? " - " : " + ") << num(std::abs(c));
    }
    out << "\nSubject To\n";
    for (const Constraint& c : model.constraints) {
        out << " " << c.name << ":";
        for (const LinearTerm& t : c.terms) {
            out << (t.coeff < 0 ? " - " : " + ") << num(std::abs(t.coeff)) << " "
                << model.vars[t.var].name;
        }
        out << " " << rel_text(c.rel) << " " << num(c.rhs) << "\n";
    }
    out << "Bounds\n";
    for (const Variable& v : model.vars) {
        if (v.lb == v.ub)
            out << " " << v.name << " = " << num(v.lb) << "\n";
        else if (v.ub == kInf)
            out << " " << v.name << " >= " << num(v.lb) << "\n";
        else
            out << " " << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << "\n";
    }
    bool any_bin = false;
    for (const Variable& v : model.vars) any_bin = any_bin || v.integral;
    if (any_bin) {
        out << "Binaries\n";
        for (const Variable& v : model.vars)
            if (v.integral) out << " " << v.name << "\n";
    }
    out << "End\n";
    return out.str();
}

std::string write_mps(const MilpModel& model) {
    check_exportable(model);
    std::ostringstream out;
    append_metadata(out, model, "*");
    out << "NAME          kpfl_model\n";
    out << "ROWS\n N  obj\n";
    for (const Constraint& c : model.constraints) {
        char kind = c.rel == Relation::le ? 'L' : (c.rel == Relation::ge ? 'G' : 'E');
        out << " " << kind << "  " << c.name << "\n";
    }
    // Column-major coefficient lists in variable order.
    std::vector<std::vector<std::pair<const std::string*, double>>> cols(model.vars.size());
    for (std::size_t i = 0; i < model.vars.size(); ++i)
        if (model.objective[i] != 0.0) cols[i].push_back({nullptr, model.objective[i]});
    for (const Constraint& c : model.constraints)
        for (const LinearTerm& t : c.terms) cols[t.var].push_back({&c.name, t.coeff});

    out << "COLUMNS\n";
    bool in_int = false;
    int marker = 0;
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        if (model.vars[i].integral != in_int) {
            out << "    MARKER" << marker++ << "    'MARKER'    "
                << (model.vars[i].integral ? "'INTORG'" : "'INTEND'") << "\n";
            in_int = model.vars[i].integral;
        }
        for (const auto& [row, coeff] : cols[i]) {
            out << "    " << model.vars[i].name << "    " << (row ? *row : std::string("obj"))
                << "    " << num(coeff) << "\n";
        }
    }
    if (in_int) out << "    MARKER" << marker++ << "    'MARKER'    'INTEND'\n";

    out << "RHS\n";
    for (const Constraint& c : model.constraints)
        if (c.rhs != 0.0) out << "    RHS    " << c.name << "    " << num(c.rhs) << "\n";
    if (model.objective_constant != 0.0)
        out << "    RHS    obj    " << num(-model.objective_constant) << "\n";

    out << "BOUNDS\n";
    for (const Variable& v : model.vars) {
        if (v.lb == v.ub) {
            out << " FX BND    " << v.name << "    " << num(v.lb) << "\n";
            continue;
        }
        if (v.lb != 0.0) out << " LO BND    " << v.name << "    " << num(v.lb) << "\n";
        if (v.ub != kInf) out << " UP BND    " << v.name << "    " << num(v.ub) << "\n";
    }
    out << "ENDATA\n";
    return out.str();
}

void export_model(const MilpModel& model, ModelFormat format, const std::string& path) {
    const std::string text = format == ModelFormat::lp ? write_lp(model) : write_mps(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file " + path);
    out << text;
    if (!out.flush()) throw DataError("failed writing model file " + path);
}

namespace {

struct LpTokens {
    std::vector<std::string> tokens;
    std::size_t pos = 0;

    bool done() const { return pos >= tokens.size(); }
    const std::string& peek() const { return tokens[pos]; }
    std::string take() { return tokens[pos++]; }
};

bool is_number(const std::string& t) {
    char* end = nullptr;
    std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && !t.empty();
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

MilpModel parse_lp(const std::string& text) {
    LpTokens ts;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const std::size_t comment = line.find('\\');
            if (comment != std::string::npos) line = line.substr(0, comment);
            // Separate ':' so "obj:" splits cleanly.
            std::string spaced;
            for (char c : line) {
                if (c == ':') {
                    spaced += " : ";
                } else {
                    spaced += c;
                }
            }
            std::istringstream ls(spaced);
            std::string tok;
            while (ls >> tok) ts.tokens.push_back(tok);
        }
    }

    MilpModel model;
    std::unordered_map<std::string, std::size_t> vars;
    auto var_index = [&](const std::string& name) {
        auto it = vars.find(name);
        if (it != vars.end()) return it->second;
        model.vars.push_back(Variable{name, 0.0, kInf, false});
        model.objective.push_back(0.0);
        vars.emplace(name, model.vars.size() - 1);
        return model.vars.size() - 1;
    };

    enum class Section { none, objective, constraints, bounds, binaries, end };
    Section section = Section::none;

    auto section_of = [&](const std::string& tok) -> std::optional<Section> {
        const std::string t = lower(tok);
        if (t == "minimize" || t == "minimise" || t == "min") return Section::objective;
        if (t == "subject") {
            if (!ts.done() && lower(ts.peek()) == "to") {
                ts.take();
                return Section::constraints;
            }
        }
        if (t == "bounds") return Section::bounds;
        if (t == "binaries" || t == "binary" || t == "bin") return Section::binaries;
        if (t == "end") return Section::end;
        return std::nullopt;
    };

    // sign/coefficient scanner for linear expressions; returns false at a
    // relation token or section break.
    auto parse_expression = [&](std::vector<LinearTerm>* terms, std::vector<double>* dense,
                                double* constant) {
        for (;;) {
            if (ts.done()) return;
            const std::string& t = ts.peek();
            if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">") return;
            // section keyword lookahead
            const std::string low = lower(t);
            if (low == "subject" || low == "bounds" || low == "binaries" || low == "binary" ||
                low == "bin" || low == "end" || low == "minimize")
                return;
            // constraint label lookahead: name ':'
            if (ts.pos + 1 < ts.tokens.size() && ts.tokens[ts.pos + 1] == ":") return;

            double sign = 1.0;
            std::string tok = ts.take();
            while (tok == "+" || tok == "-") {
                if (tok == "-") sign = -sign;
                if (ts.done()) throw DataError("LP parse: dangling sign");
                tok = ts.take();
            }
            double coeff = 1.0;
            if (is_number(tok)) {
                coeff = std::strtod(tok.c_str(), nullptr);
                if (ts.done() || is_number(ts.peek()) || ts.peek() == "+" || ts.peek() == "-" ||
                    ts.peek() == "<=" || ts.peek() == ">=" || ts.peek() == "=" ||
                    lower(ts.peek()) == "subject" || lower(ts.peek()) == "bounds" ||
                    lower(ts.peek()) == "binaries" || lower(ts.peek()) == "end" ||
                    (ts.pos + 1 < ts.tokens.size() && ts.tokens[ts.pos + 1] == ":")) {
                    if (constant) *constant += sign * coeff;
                    else throw DataError("LP parse: bare constant in constraint expression");
                    continue;
                }
                tok = ts.take();
            }
            const std::size_t v = var_index(tok);
            if (dense)
                (*dense)[v] += sign * coeff;
            else
                terms->push_back({v, sign * coeff});
        }
    };

    while (!ts.done()) {
        std::string tok = ts.take();
        if (auto s = section_of(tok)) {
            section = *s;
            if (section == Section::end) break;
            continue;
        }
        switch (section) {
            case Section::objective: {
                if (ts.done() || ts.peek() != ":")
                    throw DataError("LP parse: expected 'obj:' label");
                ts.take();  // ':'
                model.objective.resize(model.vars.size());
                // dense may grow as vars appear; use an adapter loop
                std::vector<double> dense;
                // parse into temporary then merge (vars created on the fly)
                double constant = 0.0;
                std::vector<LinearTerm> terms;
                parse_expression(&terms, nullptr, &constant);
                for (const LinearTerm& t : terms) model.objective[t.var] += t.coeff;
                model.objective_constant += constant;
                break;
            }
            case Section::constraints: {
                Constraint c;
                c.name = tok;
                if (ts.done() || ts.take() != ":")
                    throw DataError("LP parse: expected ':' after constraint name " + tok);
                parse_expression(&c.terms, nullptr, nullptr);
                if (ts.done()) throw DataError("LP parse: missing relation in " + c.name);
                const std::string rel = ts.take();
                if (rel == "<=" || rel == "<")
                    c.rel = Relation::le;
                else if (rel == ">=" || rel == ">")
                    c.rel = Relation::ge;
                else if (rel == "=")
                    c.rel = Relation::eq;
                else
                    throw DataError("LP parse: bad relation '" + rel + "' in " + c.name);
                if (ts.done() || !is_number(ts.peek()))
                    throw DataError("LP parse: missing rhs in " + c.name);
                c.rhs = std::strtod(ts.take().c_str(), nullptr);
                model.constraints.push_back(std::move(c));
                break;
            }
            case Section::bounds: {
                // forms: name = v | name >= lb | lb <= name <= ub
                if (is_number(tok)) {
                    const double lb = std::strtod(tok.c_str(), nullptr);
                    if (ts.take() != "<=") throw DataError("LP parse: bad bound line");
                    const std::size_t v = var_index(ts.take());
                    if (ts.take() != "<=") throw DataError("LP parse: bad bound line");
                    const double ub = std::strtod(ts.take().c_str(), nullptr);
                    model.vars[v].lb = lb;
                    model.vars[v].ub = ub;
                } else {
                    const std::size_t v = var_index(tok);
                    const std::string rel = ts.take();
                    const double val = std::strtod(ts.take().c_str(), nullptr);
                    if (rel == "=") {
                        model.vars[v].lb = model.vars[v].ub = val;
                    } else if (rel == ">=") {
                        model.vars[v].lb = val;
                        model.vars[v].ub = kInf;
                    } else if (rel == "<=") {
                        model.vars[v].ub = val;
                    } else {
                        throw DataError("LP parse: bad bound relation " + rel);
                    }
                }
                break;
            }
            case Section::binaries: {
                model.vars[var_index(tok)].integral = true;
                break;
            }
            default:
                throw DataError("LP parse: unexpected token '" + tok + "'");
        }
        model.objective.resize(model.vars.size(), 0.0);
    }
    model.objective.resize(model.vars.size(), 0.0);
    return model;
}

}  // namespace kp
