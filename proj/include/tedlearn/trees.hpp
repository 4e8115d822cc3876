#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace tedlearn {

constexpr const char* kGapToken = "-";

/// Finite symbol set. The gap token "-" is never a member but is always
/// addressable as the extra index `gap_index() == size()`.
class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> symbols);

    std::size_t size() const { return symbols_.size(); }
    int gap_index() const { return static_cast<int>(symbols_.size()); }
    std::size_t extended_size() const { return symbols_.size() + 1; }

    /// Symbol name for an index; the gap index renders as "-".
    const std::string& symbol(int index) const;
    /// Index of a symbol name; throws on unknown names and on "-".
    int index_of(const std::string& name) const;
    /// Like index_of but returns -1 instead of throwing.
    int find(const std::string& name) const;

    const std::vector<std::string>& symbols() const { return symbols_; }
    bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, int> index_;
    static const std::string gap_name_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

AlphabetPtr make_alphabet(std::vector<std::string> symbols);

/// Rooted ordered labeled tree, stored as flat preorder arrays.
/// Immutable after construction.
class Tree {
public:
    /// Grammar: tree := label | label "(" tree ("," tree)* ")", labels over
    /// [A-Za-z0-9_], optional whitespace anywhere between tokens.
    static Tree parse(const std::string& text, AlphabetPtr alphabet);

    /// From preorder label ids and parent links (parents[i] < i, root -1).
    static Tree build(std::vector<int> labels, std::vector<int> parents, AlphabetPtr alphabet);

    /// Canonical form: no whitespace, commas between siblings, leaves bare.
    std::string to_string() const;

    int size() const { return static_cast<int>(labels_.size()); }
    int label(int node) const { return labels_[node]; }
    const std::string& label_name(int node) const;
    int parent(int node) const { return parents_[node]; }
    const std::vector<int>& children(int node) const { return children_[node]; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<int>& parents() const { return parents_; }
    const AlphabetPtr& alphabet() const { return alphabet_; }

    bool operator==(const Tree& other) const;

private:
    Tree() = default;
    AlphabetPtr alphabet_;
    std::vector<int> labels_;    // preorder
    std::vector<int> parents_;   // -1 for root
    std::vector<std::vector<int>> children_;
};

/// Labeled tree collection over one alphabet.
struct Dataset {
    AlphabetPtr alphabet;
    std::vector<Tree> trees;
    std::vector<std::string> labels;  // class label per record

    std::size_t size() const { return trees.size(); }
    /// Distinct class labels in first-appearance order.
    std::vector<std::string> class_names() const;
    std::vector<int> class_ids() const;  // record -> index into class_names()

    /// JSON document with keys "alphabet" and "records" ({"tree","label"}).
    static Dataset load(const std::string& path);
    static Dataset from_json_text(const std::string& text);
    void save(const std::string& path) const;
    std::string to_json_text() const;
};

}  // namespace tedlearn
