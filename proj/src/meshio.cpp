#include "shapeopt/meshio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace shapeopt::mesh {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------- OBJ

MeshData parse_obj(const std::string& text, const std::string& path) {
    MeshData out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x >> p.y >> p.z))
                throw ParseError(path + ":" + std::to_string(lineno) + ": malformed vertex");
            out.vertices.push_back(p);
        } else if (tag == "f") {
            std::string tok;
            std::vector<int> idx;
            while (ls >> tok) {
                const auto slash = tok.find('/');
                if (slash != std::string::npos) tok = tok.substr(0, slash);
                int i = 0;
                try {
                    i = std::stoi(tok);
                } catch (const std::exception&) {
                    throw ParseError(path + ":" + std::to_string(lineno) + ": malformed face index");
                }
                if (i <= 0)
                    throw ParseError(path + ":" + std::to_string(lineno) +
                                     ": face indices must be positive 1-based");
                idx.push_back(i - 1);
            }
            if (idx.size() != 3)
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": only triangles supported (got " +
                                 std::to_string(idx.size()) + " indices)");
            out.faces.push_back({{idx[0], idx[1], idx[2]}});
        }
        // all other tags ignored
    }
    return out;
}

// ---------------------------------------------------------------------- PLY

enum class PType { i8, u8, i16, u16, i32, u32, f32, f64 };

int ptype_size(PType t) {
    switch (t) {
        case PType::i8:
        case PType::u8:
            return 1;
        case PType::i16:
        case PType::u16:
            return 2;
        case PType::i32:
        case PType::u32:
        case PType::f32:
            return 4;
        case PType::f64:
            return 8;
    }
    return 0;
}

PType parse_ptype(const std::string& s, const std::string& path) {
    if (s == "char" || s == "int8") return PType::i8;
    if (s == "uchar" || s == "uint8") return PType::u8;
    if (s == "short" || s == "int16") return PType::i16;
    if (s == "ushort" || s == "uint16") return PType::u16;
    if (s == "int" || s == "int32") return PType::i32;
    if (s == "uint" || s == "uint32") return PType::u32;
    if (s == "float" || s == "float32") return PType::f32;
    if (s == "double" || s == "float64") return PType::f64;
    throw ParseError(path + ": unknown ply property type '" + s + "'");
}

struct PProp {
    std::string name;
    PType type = PType::f32;
    bool is_list = false;
    PType count_type = PType::u8;
};

struct PElem {
    std::string name;
    long count = 0;
    std::vector<PProp> props;
};

struct BinCursor {
    const char* p;
    const char* end;
    const std::string& path;

    double scalar(PType t) {
        const int sz = ptype_size(t);
        if (p + sz > end) throw ParseError(path + ": unexpected end of binary ply data");
        double v = 0.0;
        switch (t) {
            case PType::i8: {
                std::int8_t x;
                std::memcpy(&x, p, 1);
                v = x;
                break;
            }
            case PType::u8: {
                std::uint8_t x;
                std::memcpy(&x, p, 1);
                v = x;
                break;
            }
            case PType::i16: {
                std::int16_t x;
                std::memcpy(&x, p, 2);
                v = x;
                break;
            }
            case PType::u16: {
                std::uint16_t x;
                std::memcpy(&x, p, 2);
                v = x;
                break;
            }
            case PType::i32: {
                std::int32_t x;
                std::memcpy(&x, p, 4);
                v = x;
                break;
            }
            case PType::u32: {
                std::uint32_t x;
                std::memcpy(&x, p, 4);
                v = x;
                break;
            }
            case PType::f32: {
                float x;
                std::memcpy(&x, p, 4);
                v = x;
                break;
            }
            case PType::f64: {
                double x;
                std::memcpy(&x, p, 8);
                v = x;
                break;
            }
        }
        p += sz;
        return v;
    }
};

MeshData parse_ply(const std::string& text, const std::string& path) {
    std::size_t pos = 0;
    auto next_line = [&]() {
        if (pos >= text.size()) throw ParseError(path + ": unexpected end of ply header");
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = nl + 1;
        return line;
    };

    if (next_line() != "ply") throw ParseError(path + ": missing ply magic");
    bool binary = false;
    bool have_format = false;
    std::vector<PElem> elems;
    for (;;) {
        const std::string line = next_line();
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "comment" || tag == "obj_info" || tag.empty()) continue;
        if (tag == "format") {
            std::string fmt, ver;
            ls >> fmt >> ver;
            if (fmt == "ascii")
                binary = false;
            else if (fmt == "binary_little_endian")
                binary = true;
            else
                throw ParseError(path + ": unsupported ply format '" + fmt + "'");
            have_format = true;
        } else if (tag == "element") {
            PElem e;
            if (!(ls >> e.name >> e.count) || e.count < 0)
                throw ParseError(path + ": malformed element line");
            elems.push_back(e);
        } else if (tag == "property") {
            if (elems.empty()) throw ParseError(path + ": property before element");
            std::string t1;
            ls >> t1;
            PProp p;
            if (t1 == "list") {
                std::string ct, vt;
                if (!(ls >> ct >> vt >> p.name)) throw ParseError(path + ": malformed list property");
                p.is_list = true;
                p.count_type = parse_ptype(ct, path);
                p.type = parse_ptype(vt, path);
            } else {
                p.type = parse_ptype(t1, path);
                if (!(ls >> p.name)) throw ParseError(path + ": malformed property");
            }
            elems.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        } else {
            throw ParseError(path + ": unknown ply header line '" + line + "'");
        }
    }
    if (!have_format) throw ParseError(path + ": ply header missing format line");

    MeshData out;
    std::istringstream as;
    BinCursor bc{text.data() + pos, text.data() + text.size(), path};
    if (!binary) as.str(text.substr(pos));

    auto ascii_scalar = [&]() {
        double v;
        if (!(as >> v)) throw ParseError(path + ": unexpected end of ascii ply data");
        return v;
    };

    for (const PElem& e : elems) {
        if (e.name == "vertex") {
            int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1, iq = -1;
            for (std::size_t k = 0; k < e.props.size(); ++k) {
                const PProp& p = e.props[k];
                if (p.is_list) throw ParseError(path + ": list property on vertex element");
                if (p.name == "x") ix = static_cast<int>(k);
                if (p.name == "y") iy = static_cast<int>(k);
                if (p.name == "z") iz = static_cast<int>(k);
                if (p.name == "nx") inx = static_cast<int>(k);
                if (p.name == "ny") iny = static_cast<int>(k);
                if (p.name == "nz") inz = static_cast<int>(k);
                if (p.name == "quality") iq = static_cast<int>(k);
            }
            if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path + ": vertex element missing x/y/z");
            for (int c : {ix, iy, iz})
                if (e.props[c].type != PType::f32 && e.props[c].type != PType::f64)
                    throw ParseError(path + ": vertex coordinates must be float32 or float64");
            const bool has_n = inx >= 0 || iny >= 0 || inz >= 0;
            if (has_n && (inx < 0 || iny < 0 || inz < 0))
                throw ParseError(path + ": vertex normals must provide all of nx, ny, nz");
            std::vector<double> row(e.props.size());
            for (long i = 0; i < e.count; ++i) {
                for (std::size_t k = 0; k < e.props.size(); ++k)
                    row[k] = binary ? bc.scalar(e.props[k].type) : ascii_scalar();
                out.vertices.push_back({row[ix], row[iy], row[iz]});
                if (has_n) out.vertex_normal.push_back({row[inx], row[iny], row[inz]});
                if (iq >= 0) out.vertex_quality.push_back(row[iq]);
            }
        } else if (e.name == "face") {
            int ilist = -1, inx = -1, iny = -1, inz = -1;
            for (std::size_t k = 0; k < e.props.size(); ++k) {
                const PProp& p = e.props[k];
                if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index"))
                    ilist = static_cast<int>(k);
                if (p.name == "nx") inx = static_cast<int>(k);
                if (p.name == "ny") iny = static_cast<int>(k);
                if (p.name == "nz") inz = static_cast<int>(k);
            }
            if (ilist < 0) throw ParseError(path + ": face element missing vertex index list");
            const bool has_n = inx >= 0 || iny >= 0 || inz >= 0;
            if (has_n && (inx < 0 || iny < 0 || inz < 0))
                throw ParseError(path + ": face normals must provide all of nx, ny, nz");
            std::vector<double> row(e.props.size());
            for (long i = 0; i < e.count; ++i) {
                Face f{};
                for (std::size_t k = 0; k < e.props.size(); ++k) {
                    const PProp& p = e.props[k];
                    if (p.is_list) {
                        const long cnt = static_cast<long>(binary ? bc.scalar(p.count_type)
                                                                  : ascii_scalar());
                        if (cnt != 3)
                            throw ParseError(path + ": only triangles supported (face with " +
                                             std::to_string(cnt) + " vertices)");
                        for (int j = 0; j < 3; ++j)
                            f.v[j] = static_cast<int>(binary ? bc.scalar(p.type) : ascii_scalar());
                    } else {
                        row[k] = binary ? bc.scalar(p.type) : ascii_scalar();
                    }
                }
                out.faces.push_back(f);
                if (has_n) out.face_normal.push_back({row[inx], row[iny], row[inz]});
            }
        } else {
            // skip unhonored elements
            for (long i = 0; i < e.count; ++i)
                for (const PProp& p : e.props) {
                    if (p.is_list) {
                        const long cnt =
                            static_cast<long>(binary ? bc.scalar(p.count_type) : ascii_scalar());
                        for (long j = 0; j < cnt; ++j)
                            binary ? bc.scalar(p.type) : ascii_scalar();
                    } else {
                        binary ? bc.scalar(p.type) : ascii_scalar();
                    }
                }
        }
    }
    return out;
}

void fmt(std::string& s, const char* f, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v);
    s += buf;
}

}  // namespace

MeshData load_mesh_data(const std::string& path) {
    const std::string ext = lower_ext(path);
    const std::string text = read_file(path);
    if (ext == "obj") return parse_obj(text, path);
    if (ext == "ply") return parse_ply(text, path);
    throw ParseError(path + ": unsupported mesh format '." + ext + "' (use .obj or .ply)");
}

TriMesh load_mesh(const std::string& path) { return load_mesh_data(path).build(); }

void save_mesh(const TriMesh& mesh, const std::string& path, const MeshFields& fields) {
    const std::string ext = lower_ext(path);
    const int n = mesh.n_vertices();
    const int m = mesh.n_faces();
    if (!fields.vertex_quality.empty() && static_cast<int>(fields.vertex_quality.size()) != n)
        throw ShapeMismatchError("vertex quality field size does not match mesh");
    if (!fields.vertex_normal.empty() && static_cast<int>(fields.vertex_normal.size()) != n)
        throw ShapeMismatchError("vertex normal field size does not match mesh");
    if (!fields.face_normal.empty() && static_cast<int>(fields.face_normal.size()) != m)
        throw ShapeMismatchError("face normal field size does not match mesh");

    std::string body;
    if (ext == "obj") {
        if (!fields.vertex_quality.empty() || !fields.vertex_normal.empty() ||
            !fields.face_normal.empty())
            throw DomainError("obj output cannot carry extra fields, use ply");
        for (const std::string& c : fields.comments) body += "# " + c + "\n";
        for (const Vec3& p : mesh.vertices()) {
            body += "v";
            fmt(body, " %.17g", p.x);
            fmt(body, " %.17g", p.y);
            fmt(body, " %.17g", p.z);
            body += "\n";
        }
        for (const Face& f : mesh.faces())
            body += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " +
                    std::to_string(f[2] + 1) + "\n";
    } else if (ext == "ply") {
        body += "ply\nformat ascii 1.0\n";
        for (const std::string& c : fields.comments) body += "comment " + c + "\n";
        body += "element vertex " + std::to_string(n) + "\n";
        body += "property double x\nproperty double y\nproperty double z\n";
        if (!fields.vertex_normal.empty())
            body += "property double nx\nproperty double ny\nproperty double nz\n";
        if (!fields.vertex_quality.empty()) body += "property double quality\n";
        body += "element face " + std::to_string(m) + "\n";
        body += "property list uchar int vertex_indices\n";
        if (!fields.face_normal.empty())
            body += "property double nx\nproperty double ny\nproperty double nz\n";
        body += "end_header\n";
        for (int i = 0; i < n; ++i) {
            const Vec3& p = mesh.vertices()[i];
            fmt(body, "%.17g", p.x);
            fmt(body, " %.17g", p.y);
            fmt(body, " %.17g", p.z);
            if (!fields.vertex_normal.empty()) {
                const Vec3& q = fields.vertex_normal[i];
                fmt(body, " %.17g", q.x);
                fmt(body, " %.17g", q.y);
                fmt(body, " %.17g", q.z);
            }
            if (!fields.vertex_quality.empty()) fmt(body, " %.17g", fields.vertex_quality[i]);
            body += "\n";
        }
        for (int f = 0; f < m; ++f) {
            const Face& face = mesh.faces()[f];
            body += "3 " + std::to_string(face[0]) + " " + std::to_string(face[1]) + " " +
                    std::to_string(face[2]);
            if (!fields.face_normal.empty()) {
                const Vec3& q = fields.face_normal[f];
                fmt(body, " %.17g", q.x);
                fmt(body, " %.17g", q.y);
                fmt(body, " %.17g", q.z);
            }
            body += "\n";
        }
    } else {
        throw DomainError(path + ": unsupported mesh format '." + ext + "' (use .obj or .ply)");
    }

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << body;
    if (!os) throw IoError("write failed: " + path);
}

CloudData load_cloud(const std::string& path) {
    const std::string ext = lower_ext(path);
    CloudData out;
    if (ext == "ply") {
        MeshData md = parse_ply(read_file(path), path);
        out.points = std::move(md.vertices);
        out.normals = std::move(md.vertex_normal);
    } else if (ext == "xyz" || ext == "txt") {
        const std::string text = read_file(path);
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        int width = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            std::istringstream ls(line);
            std::vector<double> vals;
            double v;
            while (ls >> v) vals.push_back(v);
            if (vals.empty()) continue;
            if (vals.size() != 3 && vals.size() != 6)
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": expected 3 or 6 columns");
            if (width == 0) width = static_cast<int>(vals.size());
            if (static_cast<int>(vals.size()) != width)
                throw ParseError(path + ":" + std::to_string(lineno) + ": inconsistent column count");
            out.points.push_back({vals[0], vals[1], vals[2]});
            if (width == 6) out.normals.push_back({vals[3], vals[4], vals[5]});
        }
    } else {
        throw ParseError(path + ": unsupported cloud format '." + ext + "' (use .ply or .xyz)");
    }
    if (out.points.empty()) throw EmptyCloudError(path + ": cloud has no points");
    if (!out.normals.empty() && out.normals.size() != out.points.size())
        throw ParseError(path + ": normal count does not match point count");
    return out;
}

void save_cloud(const CloudData& cloud, const std::string& path,
                std::span<const std::string> comments) {
    if (!cloud.normals.empty() && cloud.normals.size() != cloud.points.size())
        throw ShapeMismatchError("cloud normal count does not match point count");
    const std::string ext = lower_ext(path);
    std::string body;
    if (ext == "ply") {
        body += "ply\nformat ascii 1.0\n";
        for (const std::string& c : comments) body += "comment " + c + "\n";
        body += "element vertex " + std::to_string(cloud.points.size()) + "\n";
        body += "property double x\nproperty double y\nproperty double z\n";
        if (!cloud.normals.empty())
            body += "property double nx\nproperty double ny\nproperty double nz\n";
        body += "element face 0\nproperty list uchar int vertex_indices\nend_header\n";
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const Vec3& p = cloud.points[i];
            fmt(body, "%.17g", p.x);
            fmt(body, " %.17g", p.y);
            fmt(body, " %.17g", p.z);
            if (!cloud.normals.empty()) {
                const Vec3& q = cloud.normals[i];
                fmt(body, " %.17g", q.x);
                fmt(body, " %.17g", q.y);
                fmt(body, " %.17g", q.z);
            }
            body += "\n";
        }
    } else if (ext == "xyz" || ext == "txt") {
        for (const std::string& c : comments) body += "# " + c + "\n";
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const Vec3& p = cloud.points[i];
            fmt(body, "%.17g", p.x);
            fmt(body, " %.17g", p.y);
            fmt(body, " %.17g", p.z);
            if (!cloud.normals.empty()) {
                const Vec3& q = cloud.normals[i];
                fmt(body, " %.17g", q.x);
                fmt(body, " %.17g", q.y);
                fmt(body, " %.17g", q.z);
            }
            body += "\n";
        }
    } else {
        throw DomainError(path + ": unsupported cloud format '." + ext + "' (use .ply or .xyz)");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << body;
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace shapeopt::mesh
