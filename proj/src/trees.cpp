#include "tedlearn/trees.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tedlearn/util.hpp"

namespace tedlearn {

const std::string Alphabet::gap_name_ = kGapToken;

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const std::string& s = symbols_[i];
        if (s.empty()) throw std::invalid_argument("alphabet: empty symbol");
        if (s == gap_name_) throw std::invalid_argument("alphabet: gap token \"-\" is reserved");
        for (char ch : s) {
            if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_')
                throw std::invalid_argument("alphabet: invalid character in symbol \"" + s + "\"");
        }
        if (!index_.emplace(s, static_cast<int>(i)).second)
            throw std::invalid_argument("alphabet: duplicate symbol \"" + s + "\"");
    }
}

const std::string& Alphabet::symbol(int index) const {
    if (index == gap_index()) return gap_name_;
    return symbols_.at(static_cast<std::size_t>(index));
}

int Alphabet::index_of(const std::string& name) const {
    int i = find(name);
    if (i < 0) throw std::invalid_argument("alphabet: unknown symbol \"" + name + "\"");
    return i;
}

int Alphabet::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

AlphabetPtr make_alphabet(std::vector<std::string> symbols) {
    return std::make_shared<const Alphabet>(std::move(symbols));
}

namespace {

struct Parser {
    const std::string& text;
    AlphabetPtr alphabet;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw std::invalid_argument("tree parse error at position " + std::to_string(pos) + ": " +
                                    message);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    static bool is_label_char(char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
    }

    int parse_label() {
        skip_ws();
        if (pos >= text.size()) fail("expected a label");
        if (text[pos] == '-') fail("gap token \"-\" is reserved and cannot label a node");
        if (!is_label_char(text[pos]))
            fail(std::string("unexpected character '") + text[pos] + "'");
        std::size_t start = pos;
        while (pos < text.size() && is_label_char(text[pos])) ++pos;
        std::string name = text.substr(start, pos - start);
        int id = alphabet->find(name);
        if (id < 0) {
            pos = start;
            fail("unknown symbol \"" + name + "\"");
        }
        return id;
    }

    // Appends the node and its subtree; returns nothing, fills arrays.
    void parse_node(int parent, std::vector<int>& labels, std::vector<int>& parents) {
        int id = parse_label();
        int self = static_cast<int>(labels.size());
        labels.push_back(id);
        parents.push_back(parent);
        skip_ws();
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            parse_node(self, labels, parents);
            skip_ws();
            while (pos < text.size() && text[pos] == ',') {
                ++pos;
                parse_node(self, labels, parents);
                skip_ws();
            }
            if (pos >= text.size() || text[pos] != ')') fail("expected ')' or ','");
            ++pos;
        }
    }
};

}  // namespace

Tree Tree::parse(const std::string& text, AlphabetPtr alphabet) {
    Parser parser{text, alphabet};
    std::vector<int> labels;
    std::vector<int> parents;
    parser.parse_node(-1, labels, parents);
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input after tree");
    return build(std::move(labels), std::move(parents), std::move(alphabet));
}

Tree Tree::build(std::vector<int> labels, std::vector<int> parents, AlphabetPtr alphabet) {
    if (labels.empty() || labels.size() != parents.size())
        throw std::invalid_argument("tree build: label/parent arrays empty or mismatched");
    Tree t;
    t.alphabet_ = std::move(alphabet);
    t.labels_ = std::move(labels);
    t.parents_ = std::move(parents);
    t.children_.assign(t.labels_.size(), {});
    for (std::size_t i = 0; i < t.labels_.size(); ++i) {
        int label = t.labels_[i];
        if (label < 0 || label >= static_cast<int>(t.alphabet_->size()))
            throw std::invalid_argument("tree build: label id out of range");
        int p = t.parents_[i];
        if (i == 0) {
            if (p != -1) throw std::invalid_argument("tree build: node 0 must be the root");
        } else if (p < 0 || p >= static_cast<int>(i)) {
            throw std::invalid_argument("tree build: parents must be earlier preorder nodes");
        } else {
            t.children_[p].push_back(static_cast<int>(i));
        }
    }
    return t;
}

const std::string& Tree::label_name(int node) const { return alphabet_->symbol(labels_[node]); }

namespace {
void serialize_node(const Tree& t, int node, std::string& out) {
    out += t.label_name(node);
    const auto& kids = t.children(node);
    if (kids.empty()) return;
    out += '(';
    for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) out += ',';
        serialize_node(t, kids[i], out);
    }
    out += ')';
}
}  // namespace

std::string Tree::to_string() const {
    std::string out;
    serialize_node(*this, 0, out);
    return out;
}

bool Tree::operator==(const Tree& other) const {
    return labels_ == other.labels_ && parents_ == other.parents_ &&
           *alphabet_ == *other.alphabet_;
}

std::vector<std::string> Dataset::class_names() const {
    std::vector<std::string> names;
    for (const auto& label : labels) {
        bool seen = false;
        for (const auto& n : names) seen = seen || n == label;
        if (!seen) names.push_back(label);
    }
    return names;
}

std::vector<int> Dataset::class_ids() const {
    auto names = class_names();
    std::vector<int> ids(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t c = 0; c < names.size(); ++c)
            if (names[c] == labels[i]) ids[i] = static_cast<int>(c);
    }
    return ids;
}

Dataset Dataset::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("dataset format error: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("alphabet") || !doc.contains("records"))
        throw std::runtime_error("dataset format error: expected keys \"alphabet\" and \"records\"");
    std::vector<std::string> symbols;
    for (const auto& s : doc.at("alphabet")) symbols.push_back(s.get<std::string>());
    Dataset d;
    d.alphabet = make_alphabet(std::move(symbols));
    for (const auto& record : doc.at("records")) {
        if (!record.contains("tree") || !record.contains("label"))
            throw std::runtime_error("dataset format error: record needs \"tree\" and \"label\"");
        d.trees.push_back(Tree::parse(record.at("tree").get<std::string>(), d.alphabet));
        d.labels.push_back(record.at("label").get<std::string>());
    }
    if (d.trees.empty()) throw std::runtime_error("dataset error: no records");
    return d;
}

Dataset Dataset::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::string Dataset::to_json_text() const {
    nlohmann::json doc;
    doc["alphabet"] = alphabet->symbols();
    doc["records"] = nlohmann::json::array();
    for (std::size_t i = 0; i < trees.size(); ++i)
        doc["records"].push_back({{"tree", trees[i].to_string()}, {"label", labels[i]}});
    return doc.dump(2) + "\n";
}

void Dataset::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << to_json_text();
}

std::string format_double(double value, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
    return buf;
}

}  // namespace tedlearn
