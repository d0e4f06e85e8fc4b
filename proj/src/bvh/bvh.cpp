#include "astf/bvh/bvh.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "astf/error.hpp"

namespace astf::bvh {

namespace {

struct Token {
    std::string_view text;
    std::size_t line;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
        } else if (c == '{' || c == '}') {
            tokens.push_back({text.substr(i, 1), line});
            ++i;
        } else {
            std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '{' &&
                   text[i] != '}')
                ++i;
            tokens.push_back({text.substr(start, i - start), line});
        }
    }
    return tokens;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    RawMotion run() {
        expect("HIERARCHY");
        std::vector<Joint> joints;
        expect("ROOT");
        parse_joint(joints, kNoParent);
        if (!at_end() && peek().text != "MOTION") {
            if (peek().text == "ROOT") fail("only one ROOT is supported");
            if (peek().text == "}") fail("unbalanced braces: unexpected '}'");
            fail("expected MOTION, found '" + std::string(peek().text) + "'");
        }
        expect("MOTION");
        expect("Frames:");
        double declared = number(next());
        if (declared < 0 || declared != static_cast<double>(static_cast<std::size_t>(declared)))
            fail("frame count must be a non-negative integer");
        expect("Frame");
        expect("Time:");
        RawMotion m;
        m.frame_time = number(next());
        if (!(m.frame_time > 0.0)) fail("frame time must be positive");

        try {
            m.skeleton = Skeleton(std::move(joints));
        } catch (const DataError& e) {
            throw ParseError(1, e.what());
        }
        std::size_t width = m.skeleton.channel_count();
        std::size_t rows = 0;
        std::size_t last_line = pos_ < tokens_.size() ? tokens_[pos_].line : line_of_last();
        while (pos_ < tokens_.size()) {
            std::size_t line = tokens_[pos_].line;
            last_line = line;
            std::size_t count = 0;
            while (pos_ < tokens_.size() && tokens_[pos_].line == line) {
                m.frames.push_back(number(tokens_[pos_]));
                ++pos_;
                ++count;
            }
            if (count != width)
                throw ParseError(line, "frame row has " + std::to_string(count) + " values, expected " +
                                           std::to_string(width));
            ++rows;
        }
        std::size_t expected = static_cast<std::size_t>(declared);
        if (rows != expected)
            throw ParseError(last_line, "frame count mismatch: header declares " + std::to_string(expected) +
                                            " frames, found " + std::to_string(rows));
        m.frame_count = rows;
        if (rows == 0) throw ParseError(last_line, "motion has no frames");
        return m;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= tokens_.size(); }
    std::size_t line_of_last() const { return tokens_.empty() ? 1 : tokens_.back().line; }

    [[noreturn]] void fail(const std::string& msg) const {
        std::size_t line = at_end() ? line_of_last() : tokens_[pos_].line;
        throw ParseError(line, msg);
    }

    const Token& peek() const {
        if (at_end()) fail("unexpected end of file");
        return tokens_[pos_];
    }

    const Token& next() {
        const Token& t = peek();
        ++pos_;
        return t;
    }

    void expect(std::string_view word) {
        if (at_end()) fail("unexpected end of file, expected '" + std::string(word) + "'");
        if (tokens_[pos_].text != word)
            fail("expected '" + std::string(word) + "', found '" + std::string(tokens_[pos_].text) + "'");
        ++pos_;
    }

    static double number(const Token& t) {
        double v = 0.0;
        const char* first = t.text.data();
        const char* last = first + t.text.size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            throw ParseError(t.line, "non-numeric datum '" + std::string(t.text) + "'");
        return v;
    }

    Eigen::Vector3d offset() {
        expect("OFFSET");
        Eigen::Vector3d v;
        for (int i = 0; i < 3; ++i) v[i] = number(next());
        return v;
    }

    void parse_joint(std::vector<Joint>& joints, std::size_t parent) {
        Joint joint;
        const Token& name = next();
        if (name.text == "{") fail("joint name missing");
        joint.name = std::string(name.text);
        joint.parent = parent;
        expect("{");
        joint.offset = offset();
        if (!at_end() && peek().text == "CHANNELS") {
            ++pos_;
            const Token& count_tok = next();
            double count = number(count_tok);
            if (count != 0 && count != 3 && count != 6)
                throw ParseError(count_tok.line, "channel count must be 0, 3 or 6");
            for (int c = 0; c < static_cast<int>(count); ++c) {
                const Token& tag = next();
                auto ch = parse_channel(tag.text);
                if (!ch) throw ParseError(tag.line, "unknown channel tag '" + std::string(tag.text) + "'");
                joint.channels.push_back(*ch);
            }
        }
        std::size_t index = joints.size();
        joints.push_back(joint);
        while (true) {
            if (at_end()) fail("unbalanced braces: missing '}' for joint '" + joints[index].name + "'");
            std::string_view word = peek().text;
            if (word == "}") {
                ++pos_;
                return;
            }
            if (word == "JOINT") {
                ++pos_;
                parse_joint(joints, index);
            } else if (word == "End") {
                ++pos_;
                expect("Site");
                expect("{");
                joints[index].end_site = offset();
                expect("}");
            } else if (word == "MOTION") {
                fail("unbalanced braces: missing '}' for joint '" + joints[index].name + "'");
            } else {
                fail("unexpected token '" + std::string(word) + "'");
            }
        }
    }
};

void write_joint(const Skeleton& sk, std::size_t j, int depth, std::ostream& out) {
    std::string indent(static_cast<std::size_t>(depth), '\t');
    const Joint& joint = sk[j];
    out << indent << (joint.parent == kNoParent ? "ROOT " : "JOINT ") << joint.name << "\n";
    out << indent << "{\n";
    out << indent << "\tOFFSET " << format_short(joint.offset.x()) << " " << format_short(joint.offset.y()) << " "
        << format_short(joint.offset.z()) << "\n";
    out << indent << "\tCHANNELS " << joint.channels.size();
    for (Channel c : joint.channels) out << " " << channel_name(c);
    out << "\n";
    auto kids = sk.children(j);
    for (std::size_t k : kids) write_joint(sk, k, depth + 1, out);
    if (kids.empty() || joint.end_site) {
        Eigen::Vector3d site = joint.end_site.value_or(Eigen::Vector3d::Zero());
        out << indent << "\tEnd Site\n" << indent << "\t{\n";
        out << indent << "\t\tOFFSET " << format_short(site.x()) << " " << format_short(site.y()) << " "
            << format_short(site.z()) << "\n";
        out << indent << "\t}\n";
    }
    out << indent << "}\n";
}

}  // namespace

std::string format_exact(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_short(double v, int digits) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
    return std::string(buf, ptr);
}

RawMotion parse_bvh(std::string_view text) { return Parser(tokenize(text)).run(); }

RawMotion parse_bvh(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_bvh(std::string_view(ss.str()));
}

RawMotion load_bvh(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    try {
        return parse_bvh(std::string_view(text));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.string() + ": " + e.message());
    }
}

void write_bvh(const RawMotion& m, std::ostream& out) {
    out << "HIERARCHY\n";
    write_joint(m.skeleton, 0, 0, out);
    out << "MOTION\n";
    out << "Frames: " << m.frame_count << "\n";
    out << "Frame Time: " << format_exact(m.frame_time) << "\n";
    std::size_t width = m.width();
    for (std::size_t f = 0; f < m.frame_count; ++f) {
        for (std::size_t c = 0; c < width; ++c) {
            if (c) out << ' ';
            out << format_short(m.at(f, c));
        }
        out << "\n";
    }
}

std::string write_bvh(const RawMotion& m) {
    std::ostringstream out;
    write_bvh(m, out);
    return out.str();
}

}  // namespace astf::bvh
