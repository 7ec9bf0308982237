#include "metactl/model_dsl.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <map>
#include <tuple>
#include <set>
#include <sstream>

#include "metactl/error.hpp"
#include "metactl/numeric_format.hpp"

namespace metactl {

std::string to_string(const ParseDiagnostic& d) {
    std::ostringstream os;
    os << d.line << ':' << d.column << ' ' << (d.severity == Severity::error ? "error" : "warning")
       << ' ' << d.message;
    return os.str();
}

bool has_errors(const std::vector<ParseDiagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const ParseDiagnostic& d) { return d.severity == Severity::error; });
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class TokenKind { identifier, number, punct, end, invalid };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;
    SourceLoc loc;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space_and_comments();
        Token tok;
        tok.loc = {line_, col_};
        if (pos_ >= src_.size()) return tok;

        const char c = src_[pos_];
        if (ident_start(c)) {
            tok.kind = TokenKind::identifier;
            while (pos_ < src_.size() && ident_char(src_[pos_])) tok.text += advance();
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
                   (c == '.' && pos_ + 1 < src_.size() &&
                    std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            tok.kind = TokenKind::number;
            tok.text += advance();
            while (pos_ < src_.size()) {
                const char d = src_[pos_];
                const bool exponent_sign =
                    (d == '-' || d == '+') && (tok.text.back() == 'e' || tok.text.back() == 'E');
                if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == 'e' || d == 'E' ||
                    exponent_sign) {
                    tok.text += advance();
                } else {
                    break;
                }
            }
        } else if ((c == '>' || c == '<') && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
            tok.kind = TokenKind::punct;
            tok.text += advance();
            tok.text += advance();
        } else if (std::string_view("{};,:=").find(c) != std::string_view::npos) {
            tok.kind = TokenKind::punct;
            tok.text += advance();
        } else {
            tok.kind = TokenKind::invalid;
            tok.text += advance();
        }
        return tok;
    }

private:
    char advance() {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

struct SyntaxError {
    ParseDiagnostic diagnostic;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { tok_ = lexer_.next(); }

    ArchitectureModel parse_system() {
        ArchitectureModel m;
        expect_keyword("system");
        m.name = expect_identifier("system name");
        expect_punct("{");

        // Sections must appear in grammar order.
        while (at_keyword("qa_type")) m.qa_types.push_back(parse_qa_type());
        while (at_keyword("component")) m.components.push_back(parse_named<Component>("component"));
        while (at_keyword("function")) m.functions.push_back(parse_named<Function>("function"));
        while (at_keyword("design")) m.designs.push_back(parse_design());
        while (at_keyword("objective")) m.objectives.push_back(parse_objective());

        if (tok_.kind == TokenKind::identifier) {
            static const std::set<std::string> sections{"qa_type", "component", "function", "design",
                                                        "objective"};
            if (sections.count(tok_.text)) {
                fail("'" + tok_.text +
                     "' declaration out of order (expected qa_type, component, function, design, "
                     "objective)");
            }
        }
        expect_punct("}");
        if (tok_.kind != TokenKind::end) fail("unexpected '" + tok_.text + "' after end of system");
        return m;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw SyntaxError{{Severity::error, tok_.loc.line, tok_.loc.column, message}};
    }

    std::string describe() const {
        switch (tok_.kind) {
            case TokenKind::end: return "end of input";
            case TokenKind::invalid: return "invalid character '" + tok_.text + "'";
            default: return "'" + tok_.text + "'";
        }
    }

    void advance() { tok_ = lexer_.next(); }

    bool at_keyword(std::string_view kw) const {
        return tok_.kind == TokenKind::identifier && tok_.text == kw;
    }

    void expect_keyword(std::string_view kw) {
        if (!at_keyword(kw)) fail("expected '" + std::string(kw) + "', found " + describe());
        advance();
    }

    void expect_punct(std::string_view p) {
        if (tok_.kind != TokenKind::punct || tok_.text != p) {
            fail("expected '" + std::string(p) + "', found " + describe());
        }
        advance();
    }

    std::string expect_identifier(std::string_view what) {
        if (tok_.kind != TokenKind::identifier) {
            fail("expected " + std::string(what) + ", found " + describe());
        }
        std::string s = tok_.text;
        advance();
        return s;
    }

    double expect_number() {
        if (tok_.kind != TokenKind::number) fail("expected number, found " + describe());
        auto v = parse_number(tok_.text);
        if (!v) fail("malformed number '" + tok_.text + "'");
        advance();
        return *v;
    }

    QAType parse_qa_type() {
        QAType q;
        expect_keyword("qa_type");
        q.loc = tok_.loc;
        q.name = expect_identifier("qa_type name");
        if (at_keyword("higher_better")) {
            q.polarity = Polarity::higher_better;
        } else if (at_keyword("lower_better")) {
            q.polarity = Polarity::lower_better;
        } else {
            fail("expected 'higher_better' or 'lower_better', found " + describe());
        }
        advance();
        expect_punct(";");
        return q;
    }

    template <typename T>
    T parse_named(std::string_view keyword) {
        T item;
        expect_keyword(keyword);
        item.loc = tok_.loc;
        item.name = expect_identifier(std::string(keyword) + " name");
        expect_punct(";");
        return item;
    }

    FunctionDesign parse_design() {
        FunctionDesign d;
        expect_keyword("design");
        d.loc = tok_.loc;
        d.name = expect_identifier("design name");
        expect_keyword("realizes");
        d.realizes = expect_identifier("function name");
        expect_punct("{");
        expect_keyword("requires");
        d.required_components.push_back(expect_identifier("component name"));
        while (tok_.kind == TokenKind::punct && tok_.text == ",") {
            advance();
            d.required_components.push_back(expect_identifier("component name"));
        }
        expect_punct(";");
        while (at_keyword("qa")) {
            advance();
            QAEstimate e;
            e.loc = tok_.loc;
            e.qa_type = expect_identifier("qa_type name");
            expect_punct("=");
            e.value = expect_number();
            expect_punct(";");
            d.qa_estimates.push_back(std::move(e));
        }
        expect_keyword("utility");
        expect_punct("=");
        d.utility = expect_number();
        expect_punct(";");
        expect_punct("}");
        return d;
    }

    Objective parse_objective() {
        Objective o;
        expect_keyword("objective");
        o.loc = tok_.loc;
        o.id = expect_identifier("objective id");
        expect_punct(":");
        o.function = expect_identifier("function name");
        expect_punct("{");
        while (at_keyword("require")) {
            advance();
            NFR n;
            n.loc = tok_.loc;
            n.qa_type = expect_identifier("qa_type name");
            if (tok_.kind == TokenKind::punct && tok_.text == ">=") {
                n.comparator = Comparator::ge;
            } else if (tok_.kind == TokenKind::punct && tok_.text == "<=") {
                n.comparator = Comparator::le;
            } else {
                fail("expected '>=' or '<=', found " + describe());
            }
            advance();
            n.threshold = expect_number();
            expect_punct(";");
            o.nfrs.push_back(std::move(n));
        }
        expect_punct("}");
        return o;
    }

    Lexer lexer_;
    Token tok_;
};

ParseDiagnostic diag(Severity s, const SourceLoc& loc, std::string message) {
    return {s, loc.line, loc.column, std::move(message)};
}

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

ParseResult parse_model(std::string_view source) {
    ParseResult result;
    ArchitectureModel model;
    try {
        model = Parser(source).parse_system();
    } catch (const SyntaxError& e) {
        result.diagnostics.push_back(e.diagnostic);
        return result;
    }
    result.diagnostics = validate(model);
    if (!has_errors(result.diagnostics)) result.model = std::move(model);
    return result;
}

ParseResult parse_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult r;
        r.diagnostics.push_back({Severity::error, 0, 0, "cannot open " + path});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

// ---------------------------------------------------------------------------
// Validation

std::vector<ParseDiagnostic> validate(const ArchitectureModel& m) {
    std::vector<ParseDiagnostic> out;
    auto error = [&](const SourceLoc& loc, std::string msg) {
        out.push_back(diag(Severity::error, loc, std::move(msg)));
    };

    auto check_unique = [&](const auto& items, auto name_of, std::string_view kind) {
        std::set<std::string> seen;
        for (const auto& item : items) {
            if (!seen.insert(name_of(item)).second) {
                error(item.loc, "duplicate " + std::string(kind) + " '" + name_of(item) + "'");
            }
        }
    };
    check_unique(m.qa_types, [](const QAType& q) { return q.name; }, "qa_type");
    check_unique(m.components, [](const Component& c) { return c.name; }, "component");
    check_unique(m.functions, [](const Function& f) { return f.name; }, "function");
    check_unique(m.designs, [](const FunctionDesign& d) { return d.name; }, "design");
    check_unique(m.objectives, [](const Objective& o) { return o.id; }, "objective");

    for (const auto& d : m.designs) {
        if (m.find_function(d.realizes) == nullptr) {
            error(d.loc, "design '" + d.name + "' realizes undeclared function '" + d.realizes + "'");
        }
        if (d.required_components.empty()) {
            error(d.loc, "design '" + d.name + "' requires no component");
        }
        for (const auto& c : d.required_components) {
            if (m.find_component(c) == nullptr) {
                error(d.loc, "design '" + d.name + "' requires undeclared component '" + c + "'");
            }
        }
        std::set<std::string> seen;
        for (const auto& e : d.qa_estimates) {
            if (m.find_qa_type(e.qa_type) == nullptr) {
                error(e.loc, "design '" + d.name + "' estimates undeclared qa_type '" + e.qa_type + "'");
            }
            if (!seen.insert(e.qa_type).second) {
                error(e.loc, "design '" + d.name + "' estimates '" + e.qa_type + "' twice");
            }
            if (!in_unit_interval(e.value)) {
                error(e.loc, "qa value " + format_number(e.value) + " for '" + e.qa_type +
                                 "' outside [0,1]");
            }
        }
        if (!in_unit_interval(d.utility)) {
            error(d.loc, "utility " + format_number(d.utility) + " of design '" + d.name +
                             "' outside [0,1]");
        }
    }

    for (const auto& o : m.objectives) {
        if (m.find_function(o.function) == nullptr) {
            error(o.loc, "objective '" + o.id + "' targets undeclared function '" + o.function + "'");
            continue;
        }
        const auto designs = m.designs_for(o.function);
        if (designs.empty()) {
            error(o.loc, "no design realizes function '" + o.function + "' of objective '" + o.id + "'");
        }
        bool nfrs_ok = true;
        for (const auto& n : o.nfrs) {
            const QAType* q = m.find_qa_type(n.qa_type);
            if (q == nullptr) {
                error(n.loc, "objective '" + o.id + "' requires undeclared qa_type '" + n.qa_type + "'");
                nfrs_ok = false;
                continue;
            }
            if (n.comparator != comparator_for(q->polarity)) {
                error(n.loc, "comparator '" + std::string(to_string(n.comparator)) + "' on " +
                                 std::string(to_string(q->polarity)) + " qa_type '" + q->name +
                                 "' (expected '" + std::string(to_string(comparator_for(q->polarity))) +
                                 "')");
                nfrs_ok = false;
            }
            if (!in_unit_interval(n.threshold)) {
                error(n.loc, "threshold " + format_number(n.threshold) + " for '" + n.qa_type +
                                 "' outside [0,1]");
                nfrs_ok = false;
            }
            for (const FunctionDesign* d : designs) {
                if (!d->estimate(n.qa_type)) {
                    error(d->loc, "design '" + d->name + "' has no estimate for '" + n.qa_type +
                                      "' required by objective '" + o.id + "'");
                    nfrs_ok = false;
                }
            }
        }
        if (!nfrs_ok || designs.empty()) continue;

        const bool satisfiable = std::any_of(designs.begin(), designs.end(), [&](const FunctionDesign* d) {
            return std::all_of(o.nfrs.begin(), o.nfrs.end(), [&](const NFR& n) {
                return satisfies(*d->estimate(n.qa_type), n.comparator, n.threshold);
            });
        });
        if (!satisfiable) {
            out.push_back(diag(Severity::warning, o.loc,
                               "statically unsatisfiable NFR: no design of '" + o.function +
                                   "' meets the requirements of objective '" + o.id + "'"));
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
        return std::tie(a.line, a.column) < std::tie(b.line, b.column);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Printing

std::string print_model(const ArchitectureModel& m) {
    std::ostringstream os;
    os << "system " << m.name << " {\n";
    for (const auto& q : m.qa_types) os << "  qa_type " << q.name << ' ' << to_string(q.polarity) << ";\n";
    if (!m.components.empty()) os << '\n';
    for (const auto& c : m.components) os << "  component " << c.name << ";\n";
    if (!m.functions.empty()) os << '\n';
    for (const auto& f : m.functions) os << "  function " << f.name << ";\n";
    for (const auto& d : m.designs) {
        os << "\n  design " << d.name << " realizes " << d.realizes << " {\n    requires ";
        for (std::size_t i = 0; i < d.required_components.size(); ++i) {
            os << (i ? ", " : "") << d.required_components[i];
        }
        os << ";\n";
        for (const auto& e : d.qa_estimates) {
            os << "    qa " << e.qa_type << " = " << format_number(e.value) << ";\n";
        }
        os << "    utility = " << format_number(d.utility) << ";\n  }\n";
    }
    for (const auto& o : m.objectives) {
        os << "\n  objective " << o.id << " : " << o.function << " {\n";
        for (const auto& n : o.nfrs) {
            os << "    require " << n.qa_type << ' ' << to_string(n.comparator) << ' '
               << format_number(n.threshold) << ";\n";
        }
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Navigation model generator

NavParameterSpace NavParameterSpace::standard() {
    return {{0.3, 0.5, 0.75}, {3.6, 6.0, 9.0}, {0.5, 0.65, 0.8}, FixedNavParameters{}};
}

bool is_valid(const NavParameterSpace& s) {
    auto ok = [](const std::vector<double>& v) {
        if (v.empty()) return false;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0.0)) return false;
            if (i > 0 && !(v[i] > v[i - 1])) return false;
        }
        return true;
    };
    return ok(s.max_vel) && ok(s.accel_lim) && ok(s.inflation_radius);
}

namespace {
double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

NavEstimates estimate_nav_design(const NavDesignParams& p, const FixedNavParameters& fixed,
                                 const PowerModel& power) {
    // Normalized over the parameter ranges: r in [0.5, 0.8], v in [0.3, 0.75].
    // Rounded to 1e-12 so printed models read 0.4 rather than 0.39999999999999997.
    auto tidy = [](double x) { return std::round(clamp01(x) * 1e12) / 1e12; };
    NavEstimates e;
    e.safety = tidy(0.30 + 0.40 * (p.inflation_radius - 0.5) / 0.3 + 0.30 * (0.75 - p.max_vel) / 0.45);
    e.energy = tidy(power.cruise_power(p.max_vel, fixed.controller_frequency, 0.0) / power.p_max);
    e.performance = tidy(p.max_vel / 0.75);
    return e;
}

ArchitectureModel generate_nav_model(const NavParameterSpace& space, const PowerModel& power) {
    if (!is_valid(space)) {
        throw Error(ErrorCode::invalid_argument,
                    "navigation parameter lists must be non-empty, positive and strictly increasing");
    }
    ArchitectureModel m;
    m.name = "navigation";
    m.qa_types = {{"safety", Polarity::higher_better, {}},
                  {"energy", Polarity::lower_better, {}},
                  {"performance", Polarity::higher_better, {}}};
    m.components.push_back({"nav_stack", {}});
    m.functions.push_back({"f_navigate", {}});

    for (double v : space.max_vel) {
        for (double a : space.accel_lim) {
            for (double r : space.inflation_radius) {
                const NavDesignParams p{v, a, r};
                const std::string name = nav_design_name(p);
                const std::string pseudo = "cfg" + name.substr(std::string_view("f_nav").size());
                const NavEstimates est = estimate_nav_design(p, space.fixed, power);

                m.components.push_back({pseudo, {}});
                FunctionDesign d;
                d.name = name;
                d.realizes = "f_navigate";
                d.required_components = {"nav_stack", pseudo};
                d.qa_estimates = {{"safety", est.safety, {}},
                                  {"energy", est.energy, {}},
                                  {"performance", est.performance, {}}};
                d.utility = est.performance;
                m.designs.push_back(std::move(d));
            }
        }
    }

    Objective o;
    o.id = "o_nav";
    o.function = "f_navigate";
    o.nfrs = {{"safety", Comparator::ge, 0.4, {}}, {"energy", Comparator::le, 0.7, {}}};
    m.objectives.push_back(std::move(o));
    return m;
}

}  // namespace metactl
