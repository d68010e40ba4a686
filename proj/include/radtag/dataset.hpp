#pragma once

#include <string>
#include <vector>

#include "radtag/common.hpp"

namespace radtag {

// The non-DICOM dataset fields, in column order.
struct DatasetRow {
    std::string image_id;
    std::string image_dir;
    std::string study_id;
    std::string patient_id;
    std::string patient_birth;
    std::string projection;
    std::string pediatric;
    std::string method_projection;
    std::string report_id;
    std::string report;  // stemmed sentences separated by " . "
    std::string method_label;  // "Physician" or "RNN_model"
    std::vector<std::string> labels;
    std::vector<std::string> localizations;  // each starts with "loc "
    std::vector<std::vector<std::string>> labels_localizations_by_sentence;
    std::vector<std::string> label_cuis;
    std::vector<std::string> localizations_cuis;
};

extern const std::vector<std::string> kDatasetColumns;

// bracketed single-quoted list style: ['a', 'b']
std::string serialize_list(const std::vector<std::string>& items);
std::vector<std::string> parse_list(const std::string& text);

std::string serialize_nested_list(
    const std::vector<std::vector<std::string>>& items);
std::vector<std::vector<std::string>> parse_nested_list(
    const std::string& text);

void write_dataset(const std::string& path,
                   const std::vector<DatasetRow>& rows);
std::vector<DatasetRow> read_dataset(const std::string& path);

}  // namespace radtag
