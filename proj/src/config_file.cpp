#include "hj/config_file.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hj/errors.hpp"

namespace hj {

std::string ConfigValue::type_name() const {
    switch (data.index()) {
        case 0: return "number";
        case 1: return "string";
        case 2: return "boolean";
        case 3: return "list";
        default: return "table";
    }
}

namespace {

enum class Tok { Key, Number, String, Bool, Equals, LBracket, RBracket, LBrace, RBrace, Comma, Newline, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    int line = 1;
};

[[noreturn]] void syntax(int line, const std::string& what) {
    throw ConfigError("line " + std::to_string(line), what);
}

bool key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'; }

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            out.push_back({Tok::Newline, "", 0.0, line});
            ++line;
            ++i;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '"') {
            std::string s;
            ++i;
            while (true) {
                if (i >= text.size() || text[i] == '\n') syntax(line, "unterminated string");
                if (text[i] == '"') break;
                if (text[i] == '\\' && i + 1 < text.size()) {
                    const char e = text[i + 1];
                    s += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                    i += 2;
                } else {
                    s += text[i++];
                }
            }
            ++i;
            out.push_back({Tok::String, s, 0.0, line});
        } else if (c == '=' || c == '[' || c == ']' || c == '{' || c == '}' || c == ',') {
            const Tok k = c == '=' ? Tok::Equals
                        : c == '[' ? Tok::LBracket
                        : c == ']' ? Tok::RBracket
                        : c == '{' ? Tok::LBrace
                        : c == '}' ? Tok::RBrace
                                   : Tok::Comma;
            out.push_back({k, std::string(1, c), 0.0, line});
            ++i;
        } else if (key_char(c) || c == '+') {
            std::size_t j = i;
            while (j < text.size() && (key_char(text[j]) || text[j] == '+')) ++j;
            std::string word = text.substr(i, j - i);
            i = j;
            if (word == "true" || word == "false") {
                out.push_back({Tok::Bool, word, 0.0, line});
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(word.c_str(), &end);
            const bool numeric = end == word.c_str() + word.size() &&
                                 (std::isdigit(static_cast<unsigned char>(word[0])) || word[0] == '-' ||
                                  word[0] == '+' || word[0] == '.');
            if (numeric) {
                if (!std::isfinite(v)) syntax(line, "non-finite number '" + word + "'");
                out.push_back({Tok::Number, word, v, line});
            } else {
                out.push_back({Tok::Key, word, 0.0, line});
            }
        } else {
            syntax(line, std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Tok::End, "", 0.0, line});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    std::map<std::string, ConfigValue> document() {
        std::map<std::string, ConfigValue> out;
        while (true) {
            skip_newlines();
            if (peek().kind == Tok::End) return out;
            const Token key = next();
            if (key.kind != Tok::Key) syntax(key.line, "expected a key, found '" + key.text + "'");
            expect(Tok::Equals, "'=' after key '" + key.text + "'");
            ConfigValue v = value();
            if (peek().kind != Tok::Newline && peek().kind != Tok::End) {
                syntax(peek().line, "unexpected '" + peek().text + "' after value of '" + key.text + "'");
            }
            if (!out.emplace(key.text, std::move(v)).second) throw ConfigError(key.text, "duplicate key");
        }
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_++]; }
    void skip_newlines() {
        while (peek().kind == Tok::Newline) ++pos_;
    }
    void expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) syntax(peek().line, "expected " + what);
        ++pos_;
    }

    ConfigValue value() {
        const Token t = next();
        ConfigValue v;
        v.line = t.line;
        switch (t.kind) {
            case Tok::Number: v.data = t.number; return v;
            case Tok::String: v.data = t.text; return v;
            case Tok::Bool: v.data = (t.text == "true"); return v;
            case Tok::LBracket: {
                ConfigValue::List list;
                skip_newlines();
                while (peek().kind != Tok::RBracket) {
                    list.push_back(value());
                    skip_newlines();
                    if (peek().kind == Tok::Comma) {
                        ++pos_;
                        skip_newlines();
                    } else if (peek().kind != Tok::RBracket) {
                        syntax(peek().line, "expected ',' or ']' in list");
                    }
                }
                ++pos_;
                v.data = std::move(list);
                return v;
            }
            case Tok::LBrace: {
                if (depth_ > 0) syntax(t.line, "tables nest only one level deep");
                ++depth_;
                ConfigValue::Table table;
                skip_newlines();
                while (peek().kind != Tok::RBrace) {
                    const Token key = next();
                    if (key.kind != Tok::Key) syntax(key.line, "expected a key in table");
                    expect(Tok::Equals, "'=' after key '" + key.text + "'");
                    for (const auto& [k, _] : table) {
                        if (k == key.text) throw ConfigError(key.text, "duplicate key in table");
                    }
                    table.emplace_back(key.text, value());
                    skip_newlines();
                    if (peek().kind == Tok::Comma) {
                        ++pos_;
                        skip_newlines();
                    } else if (peek().kind != Tok::RBrace) {
                        syntax(peek().line, "expected ',' or '}' in table");
                    }
                }
                ++pos_;
                --depth_;
                v.data = std::move(table);
                return v;
            }
            default: syntax(t.line, "expected a value, found '" + t.text + "'");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

double as_number(const ConfigValue& v, const std::string& key) {
    if (const double* d = std::get_if<double>(&v.data)) return *d;
    throw ConfigError(key, "expected a number, found a " + v.type_name());
}

long as_int(const ConfigValue& v, const std::string& key) {
    const double d = as_number(v, key);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) throw ConfigError(key, "expected an integer");
    return static_cast<long>(d);
}

std::string as_string(const ConfigValue& v, const std::string& key) {
    if (const auto* s = std::get_if<std::string>(&v.data)) return *s;
    throw ConfigError(key, "expected a string, found a " + v.type_name());
}

const ConfigValue::List& as_list(const ConfigValue& v, const std::string& key) {
    if (const auto* l = std::get_if<ConfigValue::List>(&v.data)) return *l;
    throw ConfigError(key, "expected a list, found a " + v.type_name());
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text) {
    ConfigDocument doc;
    doc.values_ = Parser(tokenize(text)).document();
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const ConfigValue* ConfigDocument::find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
}

std::string ConfigDocument::qualified(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
}

bool ConfigDocument::has(const std::string& key) const { return values_.count(key) != 0; }

double ConfigDocument::get_double(const std::string& key, double fallback) const {
    const ConfigValue* v = find(key);
    return v ? as_number(*v, qualified(key)) : fallback;
}

long ConfigDocument::get_int(const std::string& key, long fallback) const {
    const ConfigValue* v = find(key);
    return v ? as_int(*v, qualified(key)) : fallback;
}

bool ConfigDocument::get_bool(const std::string& key, bool fallback) const {
    const ConfigValue* v = find(key);
    if (!v) return fallback;
    if (const bool* b = std::get_if<bool>(&v->data)) return *b;
    throw ConfigError(qualified(key), "expected true or false, found a " + v->type_name());
}

std::string ConfigDocument::get_string(const std::string& key, const std::string& fallback) const {
    const ConfigValue* v = find(key);
    return v ? as_string(*v, qualified(key)) : fallback;
}

std::vector<double> ConfigDocument::get_doubles(const std::string& key, std::vector<double> fallback) const {
    const ConfigValue* v = find(key);
    if (!v) return fallback;
    if (std::holds_alternative<double>(v->data)) return {as_number(*v, qualified(key))};
    std::vector<double> out;
    for (const auto& e : as_list(*v, qualified(key))) out.push_back(as_number(e, qualified(key)));
    return out;
}

std::vector<long> ConfigDocument::get_ints(const std::string& key, std::vector<long> fallback) const {
    const ConfigValue* v = find(key);
    if (!v) return fallback;
    std::vector<long> out;
    for (const auto& e : as_list(*v, qualified(key))) out.push_back(as_int(e, qualified(key)));
    return out;
}

std::vector<std::string> ConfigDocument::get_strings(const std::string& key,
                                                     std::vector<std::string> fallback) const {
    const ConfigValue* v = find(key);
    if (!v) return fallback;
    if (std::holds_alternative<std::string>(v->data)) return {as_string(*v, qualified(key))};
    std::vector<std::string> out;
    for (const auto& e : as_list(*v, qualified(key))) out.push_back(as_string(e, qualified(key)));
    return out;
}

ConfigDocument ConfigDocument::get_table(const std::string& key) const {
    ConfigDocument sub;
    sub.prefix_ = qualified(key);
    const ConfigValue* v = find(key);
    if (!v) return sub;
    const auto* table = std::get_if<ConfigValue::Table>(&v->data);
    if (!table) throw ConfigError(qualified(key), "expected a { ... } table, found a " + v->type_name());
    for (const auto& [k, val] : *table) sub.values_.emplace(k, val);
    return sub;
}

void ConfigDocument::reject_unused() const {
    for (const auto& [k, _] : values_) {
        if (!used_.count(k)) throw ConfigError(qualified(k), "unknown key");
    }
}

}  // namespace hj
