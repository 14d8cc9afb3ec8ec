#include "fairhub/error.hpp"
#include "fairhub/util/text.hpp"
#include "fairhub/workflows/extract.hpp"

#include <expat.h>

#include <limits>
#include <memory>
#include <vector>

namespace fairhub::workflows {
namespace {

struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;
    std::vector<std::unique_ptr<Node>> children;
};

constexpr std::size_t kMaxDepth = 256;

struct Builder {
    XML_Parser parser = nullptr;
    std::unique_ptr<Node> root;
    std::vector<Node*> stack;
};

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** atts) {
    auto& b = *static_cast<Builder*>(user);
    if (b.stack.size() >= kMaxDepth) {
        XML_StopParser(b.parser, XML_FALSE);
        return;
    }
    auto node = std::make_unique<Node>();
    node->name = name;
    for (std::size_t i = 0; atts[i] != nullptr; i += 2) node->attributes.emplace_back(atts[i], atts[i + 1]);
    Node* raw = node.get();
    if (b.stack.empty()) {
        b.root = std::move(node);
    } else {
        b.stack.back()->children.push_back(std::move(node));
    }
    b.stack.push_back(raw);
}

void XMLCALL on_end(void* user, const XML_Char*) {
    static_cast<Builder*>(user)->stack.pop_back();
}

void XMLCALL on_text(void* user, const XML_Char* s, int len) {
    auto& b = *static_cast<Builder*>(user);
    if (!b.stack.empty()) b.stack.back()->text.append(s, static_cast<std::size_t>(len));
}

void flatten(const Node& node, const std::string& path, std::map<std::string, std::string>& out) {
    for (const auto& [k, v] : node.attributes) out[path + "/@" + k] = v;
    const auto text = text::trim(node.text);
    if (!text.empty()) out[path] = text;
    std::map<std::string, int> totals;
    for (const auto& c : node.children) ++totals[c->name];
    std::map<std::string, int> seen;
    for (const auto& c : node.children) {
        std::string child = path + "/" + c->name;
        if (totals[c->name] > 1) child += "[" + std::to_string(++seen[c->name]) + "]";
        flatten(*c, child, out);
    }
}

bool is_text(std::string_view bytes) {
    if (!text::valid_utf8(bytes)) return false;
    for (const unsigned char c : bytes) {
        if (c < 0x20 && c != '\t' && c != '\n' && c != '\r') return false;
    }
    return true;
}

} // namespace

std::map<std::string, std::string> extract_xml_metadata(std::string_view bytes) {
    Builder b;
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                                        &XML_ParserFree);
    if (!parser) throw Error(Errc::Internal, "cannot create XML parser");
    b.parser = parser.get();
    XML_SetUserData(parser.get(), &b);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_text);
    const bool ok = bytes.size() <= static_cast<std::size_t>(std::numeric_limits<int>::max()) &&
                    XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) ==
                        XML_STATUS_OK &&
                    b.root;
    if (ok) {
        std::map<std::string, std::string> out;
        flatten(*b.root, b.root->name, out);
        return out;
    }
    if (!is_text(bytes)) {
        throw Error(Errc::BinaryGarbage, "file is neither XML nor UTF-8 text");
    }
    return {{"raw", std::string(bytes)}};
}

} // namespace fairhub::workflows
