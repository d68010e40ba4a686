#include "radtag/dataset.hpp"

#include <fstream>

#include "radtag/csv.hpp"

namespace radtag {

const std::vector<std::string> kDatasetColumns = {
    "ImageID", "ImageDir", "StudyID", "PatientID", "PatientBirth",
    "Projection", "Pediatric", "MethodProjection", "ReportID", "Report",
    "MethodLabel", "Labels", "Localizations",
    "LabelsLocalizationsBySentence", "LabelCUIS", "LocalizationsCUIS"};

namespace {

void append_quoted(std::string& out, const std::string& item) {
    if (item.find('\'') != std::string::npos)
        throw Error("list item contains a quote: " + item);
    out += '\'';
    out += item;
    out += '\'';
}

struct ListParser {
    const std::string& text;
    size_t pos = 0;

    explicit ListParser(const std::string& t) : text(t) {}

    void skip_ws() {
        while (pos < text.size() &&
               (text[pos] == ' ' || text[pos] == '\t'))
            ++pos;
    }
    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            throw Error("malformed list near position " +
                        std::to_string(pos) + " in: " + text);
        ++pos;
    }
    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }
    std::string quoted() {
        expect('\'');
        std::string out;
        while (pos < text.size() && text[pos] != '\'') out += text[pos++];
        expect('\'');
        return out;
    }
    std::vector<std::string> flat() {
        expect('[');
        std::vector<std::string> out;
        if (peek(']')) {
            ++pos;
            return out;
        }
        while (true) {
            out.push_back(quoted());
            if (peek(',')) {
                ++pos;
                continue;
            }
            expect(']');
            return out;
        }
    }
};

}  // namespace

std::string serialize_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        append_quoted(out, items[i]);
    }
    out += "]";
    return out;
}

std::vector<std::string> parse_list(const std::string& text) {
    ListParser p(text);
    auto out = p.flat();
    p.skip_ws();
    if (p.pos != text.size()) throw Error("trailing data in list: " + text);
    return out;
}

std::string serialize_nested_list(
    const std::vector<std::vector<std::string>>& items) {
    std::string out = "[";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += serialize_list(items[i]);
    }
    out += "]";
    return out;
}

std::vector<std::vector<std::string>> parse_nested_list(
    const std::string& text) {
    ListParser p(text);
    p.expect('[');
    std::vector<std::vector<std::string>> out;
    if (p.peek(']')) {
        ++p.pos;
    } else {
        while (true) {
            out.push_back(p.flat());
            if (p.peek(',')) {
                ++p.pos;
                continue;
            }
            p.expect(']');
            break;
        }
    }
    p.skip_ws();
    if (p.pos != text.size())
        throw Error("trailing data in nested list: " + text);
    return out;
}

void write_dataset(const std::string& path,
                   const std::vector<DatasetRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset " + path);
    out << csv::join_row(kDatasetColumns) << "\n";
    for (const auto& r : rows) {
        out << csv::join_row(
                   {r.image_id, r.image_dir, r.study_id, r.patient_id,
                    r.patient_birth, r.projection, r.pediatric,
                    r.method_projection, r.report_id, r.report,
                    r.method_label, serialize_list(r.labels),
                    serialize_list(r.localizations),
                    serialize_nested_list(r.labels_localizations_by_sentence),
                    serialize_list(r.label_cuis),
                    serialize_list(r.localizations_cuis)})
            << "\n";
    }
}

std::vector<DatasetRow> read_dataset(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw SchemaError(kDatasetColumns[0]);
    const auto& header = rows[0];
    for (const auto& col : kDatasetColumns) {
        bool found = false;
        for (const auto& h : header)
            if (h == col) found = true;
        if (!found) throw SchemaError(col);
    }
    if (header != kDatasetColumns)
        throw SchemaError("column order");
    std::vector<DatasetRow> out;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != kDatasetColumns.size())
            throw SchemaError("row " + std::to_string(i) + " width");
        DatasetRow d;
        d.image_id = r[0];
        d.image_dir = r[1];
        d.study_id = r[2];
        d.patient_id = r[3];
        d.patient_birth = r[4];
        d.projection = r[5];
        d.pediatric = r[6];
        d.method_projection = r[7];
        d.report_id = r[8];
        d.report = r[9];
        d.method_label = r[10];
        d.labels = parse_list(r[11]);
        d.localizations = parse_list(r[12]);
        d.labels_localizations_by_sentence = parse_nested_list(r[13]);
        d.label_cuis = parse_list(r[14]);
        d.localizations_cuis = parse_list(r[15]);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace radtag
