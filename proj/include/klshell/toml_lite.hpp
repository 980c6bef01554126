#pragma once

/**
 * @file toml_lite.hpp
 * @brief Reader for the TOML subset used by scenario files.
 *
 * Supported: comments, bare and dotted keys, [tables], [[arrays of tables]],
 * basic and literal strings, integers, floats (with exponents), booleans,
 * arrays (may span lines) and inline tables. Dates and multi-line strings are
 * not supported. The result is a nlohmann::json tree plus the source line of
 * every key, addressed by dotted path (array elements as `name[i]`).
 */

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace klshell::toml {

struct Document {
    nlohmann::json root = nlohmann::json::object();
    std::map<std::string, int> lines; ///< dotted key path -> 1-based source line

    int line_of(const std::string& path) const {
        auto it = lines.find(path);
        return it == lines.end() ? 0 : it->second;
    }
};

class Reader {
public:
    explicit Reader(std::string text) : m_text(std::move(text)) {}

    Document parse() {
        Document doc;
        m_doc = &doc;
        nlohmann::json* table = &doc.root;
        std::string table_path;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                const bool array_table = m_pos + 1 < m_text.size() && m_text[m_pos + 1] == '[';
                m_pos += array_table ? 2 : 1;
                skip_ws();
                std::vector<std::string> keys = parse_key_path();
                skip_ws();
                expect(']');
                if (array_table) expect(']');
                end_of_line();
                table = open_table(keys, array_table, table_path);
                continue;
            }
            parse_key_value(*table, table_path);
            end_of_line();
        }
        return doc;
    }

private:
    bool eof() const { return m_pos >= m_text.size(); }
    char peek() const { return eof() ? '\0' : m_text[m_pos]; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(m_line, what); }

    void advance() {
        if (m_text[m_pos] == '\n') ++m_line;
        ++m_pos;
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) advance();
    }

    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') advance();
    }

    /// Whitespace, comments and newlines (inside arrays and between statements).
    void skip_blank_lines() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                advance();
                continue;
            }
            break;
        }
    }

    void end_of_line() {
        skip_ws();
        skip_comment();
        if (peek() == '\r') advance();
        if (!eof() && peek() != '\n') fail("unexpected trailing characters");
        if (!eof()) advance();
    }

    static bool bare_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

    std::string parse_key() {
        if (peek() == '"') return parse_basic_string();
        if (peek() == '\'') return parse_literal_string();
        const std::size_t start = m_pos;
        while (!eof() && bare_char(peek())) advance();
        if (start == m_pos) fail("expected a key");
        return m_text.substr(start, m_pos - start);
    }

    std::vector<std::string> parse_key_path() {
        std::vector<std::string> keys{parse_key()};
        skip_ws();
        while (peek() == '.') {
            advance();
            skip_ws();
            keys.push_back(parse_key());
            skip_ws();
        }
        return keys;
    }

    static std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

    nlohmann::json* open_table(const std::vector<std::string>& keys, bool array_table, std::string& path) {
        nlohmann::json* node = &m_doc->root;
        path.clear();
        for (std::size_t k = 0; k < keys.size(); ++k) {
            const bool last = k + 1 == keys.size();
            path = join(path, keys[k]);
            if (last && array_table) {
                auto& arr = (*node)[keys[k]];
                if (arr.is_null()) arr = nlohmann::json::array();
                if (!arr.is_array()) fail("'" + path + "' is not an array of tables");
                arr.push_back(nlohmann::json::object());
                path += "[" + std::to_string(arr.size() - 1) + "]";
                m_doc->lines[path] = m_line;
                return &arr.back();
            }
            auto& child = (*node)[keys[k]];
            if (child.is_null()) {
                child = nlohmann::json::object();
                m_doc->lines[path] = m_line;
            } else if (last && m_defined.count(path)) {
                fail("table '" + path + "' defined twice");
            }
            if (child.is_array() && !child.empty() && child.back().is_object()) {
                path += "[" + std::to_string(child.size() - 1) + "]";
                node = &child.back();
                continue;
            }
            if (!child.is_object()) fail("'" + path + "' is not a table");
            node = &child;
        }
        m_defined[path] = true;
        return node;
    }

    void parse_key_value(nlohmann::json& table, const std::string& table_path) {
        const int line = m_line;
        std::vector<std::string> keys = parse_key_path();
        skip_ws();
        expect('=');
        skip_ws();
        nlohmann::json* node = &table;
        std::string path = table_path;
        for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
            path = join(path, keys[k]);
            auto& child = (*node)[keys[k]];
            if (child.is_null()) child = nlohmann::json::object();
            if (!child.is_object()) fail("'" + path + "' is not a table");
            node = &child;
        }
        path = join(path, keys.back());
        if (node->contains(keys.back())) fail("duplicate key '" + path + "'");
        (*node)[keys.back()] = parse_value(path);
        m_doc->lines[path] = line;
    }

    nlohmann::json parse_value(const std::string& path) {
        const char c = peek();
        if (c == '"') return parse_basic_string();
        if (c == '\'') return parse_literal_string();
        if (c == '[') return parse_array(path);
        if (c == '{') return parse_inline_table(path);
        if (m_text.compare(m_pos, 4, "true") == 0) {
            m_pos += 4;
            return true;
        }
        if (m_text.compare(m_pos, 5, "false") == 0) {
            m_pos += 5;
            return false;
        }
        return parse_number();
    }

    std::string parse_basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = peek();
            advance();
            if (c == '"') break;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                const char e = peek();
                advance();
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(std::string("unsupported escape '\\") + e + "'");
                }
                continue;
            }
            out += c;
        }
        return out;
    }

    std::string parse_literal_string() {
        expect('\'');
        const std::size_t start = m_pos;
        while (!eof() && peek() != '\'' && peek() != '\n') advance();
        if (peek() != '\'') fail("unterminated literal string");
        std::string out = m_text.substr(start, m_pos - start);
        advance();
        return out;
    }

    nlohmann::json parse_number() {
        const std::size_t start = m_pos;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                          peek() == '.' || peek() == '_'))
            advance();
        std::string tok = m_text.substr(start, m_pos - start);
        if (tok.empty()) fail("expected a value");
        std::string clean;
        for (char ch : tok)
            if (ch != '_') clean += ch;
        const char* b = clean.data();
        const char* e = clean.data() + clean.size();
        if (*b == '+') ++b;
        const bool is_float = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "nan";
        if (!is_float) {
            long long iv = 0;
            auto [ptr, ec] = std::from_chars(b, e, iv);
            if (ec == std::errc{} && ptr == e) return iv;
        } else {
            double dv = 0.0;
            auto [ptr, ec] = std::from_chars(b, e, dv);
            if (ec == std::errc{} && ptr == e) return dv;
        }
        fail("invalid value '" + tok + "'");
    }

    nlohmann::json parse_array(const std::string& path) {
        expect('[');
        nlohmann::json arr = nlohmann::json::array();
        while (true) {
            skip_blank_lines();
            if (peek() == ']') {
                advance();
                return arr;
            }
            const std::string item = path + "[" + std::to_string(arr.size()) + "]";
            const int line = m_line;
            arr.push_back(parse_value(item));
            m_doc->lines[item] = line;
            skip_blank_lines();
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() != ']') fail("expected ',' or ']' in array '" + path + "'");
        }
    }

    nlohmann::json parse_inline_table(const std::string& path) {
        expect('{');
        nlohmann::json obj = nlohmann::json::object();
        skip_ws();
        if (peek() == '}') {
            advance();
            return obj;
        }
        while (true) {
            skip_ws();
            parse_key_value(obj, path);
            skip_ws();
            if (peek() == ',') {
                advance();
                continue;
            }
            expect('}');
            return obj;
        }
    }

    std::string m_text;
    std::size_t m_pos = 0;
    int m_line = 1;
    Document* m_doc = nullptr;
    std::map<std::string, bool> m_defined;
};

inline Document parse_string(const std::string& text) { return Reader(text).parse(); }

inline Document parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

} // namespace klshell::toml
