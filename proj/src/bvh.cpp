#include "gomkit/bvh.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace gomkit {

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::Xposition: return "Xposition";
        case Channel::Yposition: return "Yposition";
        case Channel::Zposition: return "Zposition";
        case Channel::Xrotation: return "Xrotation";
        case Channel::Yrotation: return "Yrotation";
        case Channel::Zrotation: return "Zrotation";
    }
    return "?";
}

std::optional<Channel> channel_from_name(const std::string& name) {
    static const std::pair<const char*, Channel> table[] = {
        {"Xposition", Channel::Xposition}, {"Yposition", Channel::Yposition},
        {"Zposition", Channel::Zposition}, {"Xrotation", Channel::Xrotation},
        {"Yrotation", Channel::Yrotation}, {"Zrotation", Channel::Zrotation},
    };
    for (const auto& [n, c] : table)
        if (name == n) return c;
    return std::nullopt;
}

char axis_letter(Axis a) {
    switch (a) {
        case Axis::X: return 'X';
        case Axis::Y: return 'Y';
        case Axis::Z: return 'Z';
    }
    return '?';
}

std::optional<Axis> axis_from_letter(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'X': return Axis::X;
        case 'Y': return Axis::Y;
        case 'Z': return Axis::Z;
        default: return std::nullopt;
    }
}

Channel rotation_channel(Axis a) {
    switch (a) {
        case Axis::X: return Channel::Xrotation;
        case Axis::Y: return Channel::Yrotation;
        case Axis::Z: return Channel::Zrotation;
    }
    return Channel::Xrotation;
}

int Skeleton::total_channels() const {
    int n = 0;
    for (const auto& j : joints) n += static_cast<int>(j.channels.size());
    return n;
}

int Skeleton::channel_base(int joint_index) const {
    int n = 0;
    for (int i = 0; i < joint_index; ++i) n += static_cast<int>(joints[i].channels.size());
    return n;
}

std::optional<int> Skeleton::find_joint(const std::string& name) const {
    for (size_t i = 0; i < joints.size(); ++i)
        if (!joints[i].end_site && joints[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::string DescriptorId::str() const {
    std::string s = sensor;
    s += '.';
    s += axis_letter(axis);
    return s;
}

DescriptorId DescriptorId::parse(const std::string& text) {
    auto dot = text.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 2 != text.size())
        throw UnknownDescriptorError("bad descriptor id '" + text + "' (expected SENSOR.axis)");
    auto ax = axis_from_letter(text[dot + 1]);
    if (!ax)
        throw UnknownDescriptorError("bad axis in descriptor id '" + text + "'");
    return DescriptorId{text.substr(0, dot), *ax};
}

namespace {

// Whitespace-insensitive tokenizer over the HIERARCHY section. Tracks line
// numbers for error reporting. The MOTION section is parsed line-wise
// instead, because a frame is one line.
class Lexer {
  public:
    explicit Lexer(std::istream& in) : in_(in) {}

    int line() const { return line_; }

    std::string next() {
        skip_space();
        std::string tok;
        int c;
        while ((c = in_.peek()) != EOF && !std::isspace(c)) {
            tok += static_cast<char>(in_.get());
        }
        return tok;
    }

    std::string expect_any(const char* what) {
        std::string tok = next();
        if (tok.empty())
            throw SyntaxError(std::string("line ") + std::to_string(line_) +
                              ": unexpected end of input, expected " + what);
        return tok;
    }

    void expect(const std::string& want) {
        std::string tok = expect_any(("'" + want + "'").c_str());
        if (tok != want)
            throw SyntaxError("line " + std::to_string(line_) + ": expected '" + want +
                              "', got '" + tok + "'");
    }

    double expect_number(const char* what) {
        std::string tok = expect_any(what);
        try {
            size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw SyntaxError("line " + std::to_string(line_) + ": expected " + what +
                              ", got '" + tok + "'");
        }
    }

    long expect_integer(const char* what) {
        std::string tok = expect_any(what);
        long v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw SyntaxError("line " + std::to_string(line_) + ": expected " + what +
                              ", got '" + tok + "'");
        return v;
    }

    // Consumes the remainder of the current line so line-wise MOTION
    // parsing can take over cleanly.
    void finish_line() {
        int c;
        while ((c = in_.get()) != EOF && c != '\n') {
        }
        if (c == '\n') ++line_;
    }

  private:
    void skip_space() {
        int c;
        while ((c = in_.peek()) != EOF && std::isspace(c)) {
            if (c == '\n') ++line_;
            in_.get();
        }
    }

    std::istream& in_;
    int line_ = 1;
};

// Recursive descent over one joint block. The opening keyword (ROOT /
// JOINT / End Site) has already been consumed.
int parse_joint(Lexer& lex, Skeleton& skel, std::optional<int> parent, bool end_site) {
    JointNode node;
    node.parent = parent;
    node.end_site = end_site;
    if (!end_site) {
        node.name = lex.expect_any("joint name");
        if (node.name == "{")
            throw SyntaxError("line " + std::to_string(lex.line()) + ": missing joint name");
    }
    lex.expect("{");

    int index = static_cast<int>(skel.joints.size());
    skel.joints.push_back(node);

    bool saw_offset = false;
    while (true) {
        std::string tok = lex.expect_any("joint body token");
        if (tok == "OFFSET") {
            skel.joints[index].offset.x() = lex.expect_number("offset x");
            skel.joints[index].offset.y() = lex.expect_number("offset y");
            skel.joints[index].offset.z() = lex.expect_number("offset z");
            saw_offset = true;
        } else if (tok == "CHANNELS") {
            if (end_site)
                throw StructureError("line " + std::to_string(lex.line()) +
                                     ": End Site may not declare channels");
            long n = lex.expect_integer("channel count");
            if (n < 0 || n > 6)
                throw SyntaxError("line " + std::to_string(lex.line()) +
                                  ": invalid channel count " + std::to_string(n));
            for (long i = 0; i < n; ++i) {
                std::string cname = lex.expect_any("channel label");
                auto ch = channel_from_name(cname);
                if (!ch)
                    throw SyntaxError("line " + std::to_string(lex.line()) +
                                      ": unknown channel label '" + cname + "'");
                skel.joints[index].channels.push_back(*ch);
            }
        } else if (tok == "JOINT") {
            int child = parse_joint(lex, skel, index, false);
            skel.joints[index].children.push_back(child);
        } else if (tok == "End") {
            lex.expect("Site");
            int child = parse_joint(lex, skel, index, true);
            skel.joints[index].children.push_back(child);
        } else if (tok == "}") {
            break;
        } else {
            throw SyntaxError("line " + std::to_string(lex.line()) + ": unexpected token '" +
                              tok + "' in joint body");
        }
    }

    if (!saw_offset)
        throw SyntaxError("line " + std::to_string(lex.line()) + ": joint '" +
                          skel.joints[index].name + "' has no OFFSET");
    return index;
}

// Splits a motion line into double values. Returns false on any
// non-numeric field.
bool parse_frame_line(const std::string& line, std::vector<double>& out) {
    out.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
        if (p >= end) break;
        const char* tok = p;
        while (p < end && !std::isspace(static_cast<unsigned char>(*p))) ++p;
        try {
            size_t pos = 0;
            std::string field(tok, p);
            double v = std::stod(field, &pos);
            if (pos != field.size()) return false;
            out.push_back(v);
        } catch (const std::exception&) {
            return false;
        }
    }
    return true;
}

bool blank(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

} // namespace

std::pair<Skeleton, MotionClip> parse_bvh(std::istream& input) {
    Lexer lex(input);
    lex.expect("HIERARCHY");

    Skeleton skel;
    lex.expect("ROOT");
    skel.root_index = parse_joint(lex, skel, std::nullopt, false);

    std::string tok = lex.expect_any("'MOTION'");
    if (tok == "ROOT")
        throw StructureError("line " + std::to_string(lex.line()) +
                             ": multiple ROOT joints; a skeleton has exactly one root");
    if (tok != "MOTION")
        throw SyntaxError("line " + std::to_string(lex.line()) + ": expected 'MOTION', got '" +
                          tok + "'");

    lex.expect("Frames:");
    long frames = lex.expect_integer("frame count");
    if (frames == 0) throw EmptyMotionError("Frames: 0");
    if (frames < 0)
        throw SyntaxError("line " + std::to_string(lex.line()) + ": negative frame count");

    lex.expect("Frame");
    lex.expect("Time:");
    double frame_time = lex.expect_number("frame time");
    if (!(frame_time > 0.0))
        throw StructureError("line " + std::to_string(lex.line()) +
                             ": frame time must be positive, got " + std::to_string(frame_time));
    lex.finish_line();

    const int columns = skel.total_channels();
    MotionClip clip;
    clip.frame_time = frame_time;
    clip.frames.resize(frames, columns);

    // One frame per line; tolerate blank lines between and after frames.
    std::string line;
    std::vector<double> values;
    long row = 0;
    int lineno = lex.line();
    while (row < frames) {
        if (!std::getline(input, line))
            throw StructureError("frame " + std::to_string(row) + ": unexpected end of input (" +
                                 std::to_string(frames) + " frames declared)");
        ++lineno;
        if (blank(line)) continue;
        if (!parse_frame_line(line, values))
            throw SyntaxError("line " + std::to_string(lineno) + ": non-numeric motion value");
        if (static_cast<int>(values.size()) != columns)
            throw StructureError("frame " + std::to_string(row) + " has " +
                                 std::to_string(values.size()) + " values, expected " +
                                 std::to_string(columns));
        for (int c = 0; c < columns; ++c) clip.frames(row, c) = values[c];
        ++row;
    }
    while (std::getline(input, line)) {
        ++lineno;
        if (!blank(line))
            throw StructureError("line " + std::to_string(lineno) +
                                 ": trailing data after the declared frames");
    }

    clip.skeleton_ref = skel.joints[skel.root_index].name;
    return {std::move(skel), std::move(clip)};
}

std::pair<Skeleton, MotionClip> parse_bvh(const std::string& text) {
    std::istringstream in(text);
    return parse_bvh(in);
}

std::pair<Skeleton, MotionClip> load_bvh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SyntaxError("cannot open BVH file: " + path);
    return parse_bvh(in);
}

namespace {

void format_value(std::ostream& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << buf;
}

void write_joint(std::ostream& out, const Skeleton& skel, int index, int depth) {
    const JointNode& j = skel.joints[index];
    std::string indent(static_cast<size_t>(depth) * 2, ' ');

    if (j.end_site) {
        out << indent << "End Site\n";
    } else if (depth == 0) {
        out << "ROOT " << j.name << "\n";
    } else {
        out << indent << "JOINT " << j.name << "\n";
    }
    out << indent << "{\n";
    out << indent << "  OFFSET ";
    format_value(out, j.offset.x());
    out << ' ';
    format_value(out, j.offset.y());
    out << ' ';
    format_value(out, j.offset.z());
    out << "\n";
    if (!j.channels.empty()) {
        out << indent << "  CHANNELS " << j.channels.size();
        for (Channel c : j.channels) out << ' ' << channel_name(c);
        out << "\n";
    }
    for (int child : j.children) write_joint(out, skel, child, depth + 1);
    out << indent << "}\n";
}

} // namespace

void write_bvh(std::ostream& out, const Skeleton& skeleton, const MotionClip& clip) {
    if (clip.channel_count() != skeleton.total_channels())
        throw BindingError("clip has " + std::to_string(clip.channel_count()) +
                           " channels but skeleton declares " +
                           std::to_string(skeleton.total_channels()));
    out << "HIERARCHY\n";
    write_joint(out, skeleton, skeleton.root_index, 0);
    out << "MOTION\n";
    out << "Frames: " << clip.frame_count() << "\n";
    out << "Frame Time: ";
    format_value(out, clip.frame_time);
    out << "\n";
    for (long t = 0; t < clip.frame_count(); ++t) {
        for (long c = 0; c < clip.channel_count(); ++c) {
            if (c) out << ' ';
            format_value(out, clip.frames(t, c));
        }
        out << "\n";
    }
}

std::string write_bvh(const Skeleton& skeleton, const MotionClip& clip) {
    std::ostringstream out;
    write_bvh(out, skeleton, clip);
    return out.str();
}

void save_bvh(const std::string& path, const Skeleton& skeleton, const MotionClip& clip) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write BVH file: " + path);
    write_bvh(out, skeleton, clip);
}

int descriptor_column(const Skeleton& skeleton, const DescriptorId& id) {
    auto joint = skeleton.find_joint(id.sensor);
    if (!joint)
        throw UnknownDescriptorError("no joint named '" + id.sensor + "' in skeleton");
    const JointNode& j = skeleton.joints[*joint];
    Channel want = rotation_channel(id.axis);
    for (size_t k = 0; k < j.channels.size(); ++k) {
        if (j.channels[k] == want)
            return skeleton.channel_base(*joint) + static_cast<int>(k);
    }
    throw UnknownDescriptorError("joint '" + id.sensor + "' has no " +
                                 std::string(channel_name(want)) + " channel");
}

Eigen::VectorXd extract_descriptor(const Skeleton& skeleton, const MotionClip& clip,
                                   const DescriptorId& id) {
    if (clip.channel_count() != skeleton.total_channels())
        throw BindingError("clip is not bound to this skeleton (channel count mismatch)");
    return clip.frames.col(descriptor_column(skeleton, id));
}

Eigen::MatrixXd extract_descriptor_matrix(const Skeleton& skeleton, const MotionClip& clip,
                                          const std::vector<DescriptorId>& ids) {
    Eigen::MatrixXd m(clip.frame_count(), static_cast<long>(ids.size()));
    for (size_t i = 0; i < ids.size(); ++i)
        m.col(static_cast<long>(i)) = extract_descriptor(skeleton, clip, ids[i]);
    return m;
}

} // namespace gomkit
