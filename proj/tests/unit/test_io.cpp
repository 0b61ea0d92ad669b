#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iif/error.hpp"
#include "iif/io.hpp"
#include "iif/rng.hpp"

namespace fs = std::filesystem;
using namespace iif::io;

namespace {

LoadOptions with_log1p() {
    LoadOptions o;
    o.log1p = true;
    return o;
}

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("iif_io_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string put(const std::string& name, const std::string& content) const {
        write_file(file(name), content);
        return file(name);
    }

private:
    fs::path path_;
};

std::string error_of(const std::string& path, const LoadOptions& opts = {}) {
    try {
        load_matrix(path, opts);
    } catch (const iif::ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(LoadMatrix, TwoByTwo) {
    TempDir dir;
    const auto m = load_matrix(dir.put("a.csv", "1,2\n3,4\n"));
    ASSERT_EQ(m.values.rows(), 2);
    ASSERT_EQ(m.values.cols(), 2);
    EXPECT_EQ(m.values(0, 0), 1.0);
    EXPECT_EQ(m.values(0, 1), 2.0);
    EXPECT_EQ(m.values(1, 0), 3.0);
    EXPECT_EQ(m.values(1, 1), 4.0);
    EXPECT_TRUE(m.col_ids.empty());
}

TEST(LoadMatrix, Log1pAndTranspose) {
    TempDir dir;
    const auto path = dir.put("a.csv", "1,2\n3,4");
    const auto m = load_matrix(path, with_log1p());
    EXPECT_DOUBLE_EQ(m.values(0, 0), std::log(2.0));
    EXPECT_DOUBLE_EQ(m.values(0, 1), std::log(3.0));
    EXPECT_DOUBLE_EQ(m.values(1, 0), std::log(4.0));
    EXPECT_DOUBLE_EQ(m.values(1, 1), std::log(5.0));
    EXPECT_TRUE(m.log1p);
    LoadOptions transpose;
    transpose.transpose = true;
    const auto t = load_matrix(path, transpose);
    EXPECT_EQ(t.values(0, 1), 3.0);
    EXPECT_TRUE(t.transposed);
}

TEST(LoadMatrix, Errors) {
    TempDir dir;
    const auto ragged = error_of(dir.put("r.csv", "1,2\n3\n"));
    EXPECT_NE(ragged.find("row 2"), std::string::npos) << ragged;
    const auto text = error_of(dir.put("t.csv", "1,2\n3,x\n"));
    EXPECT_NE(text.find("row 2"), std::string::npos) << text;
    EXPECT_NE(text.find("column 2"), std::string::npos) << text;
    const auto negative = error_of(dir.put("n.csv", "1,-2\n3,4\n"), with_log1p());
    EXPECT_NE(negative.find("negative"), std::string::npos) << negative;
    EXPECT_FALSE(error_of(dir.put("nan.csv", "1,nan\n3,4\n")).empty());
    EXPECT_FALSE(error_of(dir.put("one.csv", "1,2\n")).empty());
    EXPECT_FALSE(error_of(dir.file("missing.csv")).empty());
}

TEST(LoadMatrix, HeaderRowIdsAndQuoting) {
    TempDir dir;
    const auto m = load_matrix(dir.put("h.csv", ",\"gene, a\",geneB\ncell1,1,2\ncell2,3,4\ncell3,5,6\n"));
    ASSERT_EQ(m.values.rows(), 3);
    ASSERT_EQ(m.values.cols(), 2);
    EXPECT_EQ(m.col_ids, (std::vector<std::string>{"gene, a", "geneB"}));
    EXPECT_EQ(m.row_ids, (std::vector<std::string>{"cell1", "cell2", "cell3"}));
    EXPECT_EQ(m.values(2, 1), 6.0);
}

TEST(LoadMatrix, TabDelimited) {
    TempDir dir;
    const auto m = load_matrix(dir.put("m.tsv", "a\tb\tc\n1\t2\t3\n4\t5\t6\n"));
    EXPECT_EQ(m.col_ids, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(m.values(1, 2), 6.0);
}

TEST(SaveMatrix, RoundTripWithinTolerance) {
    TempDir dir;
    iif::Rng rng(3);
    iif::Matrix x(7, 5);
    for (Eigen::Index i = 0; i < 7; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) x(i, j) = rng.normal() * std::pow(10.0, static_cast<double>(j) - 2.0);
    }
    save_matrix(dir.file("x.csv"), x);
    const auto back = load_matrix(dir.file("x.csv"));
    EXPECT_LE((back.values - x).cwiseAbs().maxCoeff(), 1e-12);
    save_matrix(dir.file("h.csv"), x, {"a", "b,c", "d", "e", "f"});
    const auto with_header = load_matrix(dir.file("h.csv"));
    EXPECT_EQ(with_header.col_ids[1], "b,c");
    EXPECT_TRUE(with_header.values == back.values);
}

TEST(Labels, RoundTripAndCoding) {
    TempDir dir;
    const iif::Labels labels{0, 1, 1, 2, 0};
    write_labels(dir.file("l.txt"), labels);
    EXPECT_EQ(read_file(dir.file("l.txt")), "1\n2\n2\n3\n1\n");
    EXPECT_EQ(read_labels(dir.file("l.txt")), labels);
    EXPECT_EQ(read_labels(dir.put("i.txt", "5\n-1\n5\n7\n")), (iif::Labels{1, 0, 1, 2}));
    EXPECT_EQ(read_labels(dir.put("s.txt", "ALL\nAML\nALL\n")), (iif::Labels{0, 1, 0}));
}

TEST(Features, RoundTrip) {
    TempDir dir;
    iif::FeatureSet f;
    f.indices = {0, 3, 9};
    write_features(dir.file("f.txt"), f);
    EXPECT_EQ(read_file(dir.file("f.txt")), "1\n4\n10\n");
    EXPECT_EQ(read_features(dir.file("f.txt"), 10).indices, f.indices);
    std::vector<std::string> ids(10);
    for (int j = 0; j < 10; ++j) ids[static_cast<std::size_t>(j)] = "g" + std::to_string(j);
    write_features(dir.file("g.txt"), f, ids);
    EXPECT_EQ(read_file(dir.file("g.txt")), "1,g0\n4,g3\n10,g9\n");
    EXPECT_EQ(read_features(dir.file("g.txt"), 10).indices, f.indices);
    EXPECT_THROW(read_features(dir.file("f.txt"), 5), iif::ParseError);
}

TEST(Quote, Fields) {
    EXPECT_EQ(quote_csv("plain"), "plain");
    EXPECT_EQ(quote_csv("a,b"), "\"a,b\"");
    EXPECT_EQ(quote_csv("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Spec, JsonRoundTrip) {
    auto spec = iif::datagen::nonlinear_defaults();
    spec.seed = 77;
    spec.tau_w = 0.3;
    iif::datagen::ManifoldParams params;
    params.frequency = 3.0;
    const Json j = spec_to_json(iif::datagen::Setting::nonlinear, spec, params);
    iif::datagen::Setting setting{};
    iif::datagen::SyntheticSpec back;
    iif::datagen::ManifoldParams params_back;
    spec_from_json(j, setting, back, params_back);
    EXPECT_EQ(setting, iif::datagen::Setting::nonlinear);
    EXPECT_EQ(back.seed, 77u);
    EXPECT_EQ(back.p, spec.p);
    EXPECT_EQ(back.tau_w, 0.3);
    EXPECT_EQ(params_back.frequency, 3.0);
}

TEST(Report, RoundTripIsByteIdentical) {
    auto spec = iif::datagen::linear_defaults();
    spec.n = 120;
    spec.p = 400;
    spec.n_weak = 20;
    spec.tau_w = 1.0;
    spec.seed = 2;
    const auto inst = iif::datagen::gen_linear(spec);
    DataMatrix data;
    data.values = inst.x;
    iif::pipeline::PipelineConfig cfg;
    cfg.max_iter = 3;
    const auto result = iif::pipeline::run(inst.x, cfg);

    ReportInputs in;
    in.input_path = "x.csv";
    in.data = &data;
    in.config = &cfg;
    in.result = &result;
    const Json bare = build_report(in);
    EXPECT_FALSE(bare.contains("metrics"));
    EXPECT_FALSE(bare.contains("timings"));
    EXPECT_EQ(bare["schema_version"], kReportSchemaVersion);
    ASSERT_TRUE(bare.contains("trace"));
    EXPECT_EQ(bare.at("trace").size(), result.trace.size());

    in.accuracy = iif::metrics::accuracy(result.labels, inst.truth);
    in.ari = iif::metrics::ari(result.labels, inst.truth);
    in.features = iif::metrics::feature_metrics(result.features, inst.influential(), spec.p);
    in.fit_seconds = 0.25;
    const Json full = build_report(in);
    ASSERT_TRUE(full.contains("metrics"));
    for (const char* key : {"accuracy", "ari", "fdr", "tpr"}) EXPECT_TRUE(full["metrics"].contains(key)) << key;
    EXPECT_TRUE(full.contains("timings"));

    const std::string text = dump_report(full);
    EXPECT_EQ(dump_report(parse_report(text)), text);

    Json wrong = full;
    wrong["schema_version"] = 99;
    EXPECT_THROW(parse_report(dump_report(wrong)), iif::ParseError);
    EXPECT_THROW(parse_report("{not json"), iif::ParseError);
}

TEST(Instance, WritesSidecars) {
    TempDir dir;
    auto spec = iif::datagen::linear_defaults();
    spec.n = 30;
    spec.p = 50;
    spec.n_weak = 6;
    spec.seed = 4;
    const auto inst = iif::datagen::gen_linear(spec);
    write_instance(dir.file("inst"), inst, {});
    const auto x = load_matrix(dir.file("inst/x.csv"));
    EXPECT_EQ(x.values.rows(), 30);
    EXPECT_EQ(x.values.cols(), 50);
    EXPECT_LE((x.values - inst.x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(read_labels(dir.file("inst/labels.txt")), inst.truth);
    EXPECT_EQ(read_features(dir.file("inst/features.txt"), 50).indices, inst.influential().indices);
    EXPECT_EQ(read_features(dir.file("inst/strong.txt"), 50).indices, inst.strong.indices);
    EXPECT_EQ(read_features(dir.file("inst/weak.txt"), 50).indices, inst.weak.indices);
    EXPECT_TRUE(fs::exists(dir.file("inst/spec.json")));
}
