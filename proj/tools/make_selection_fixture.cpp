// Writes the rank-1 selection fixture (tensor + predictor CSVs) to a directory.
#include "hybridfpca/io.hpp"
#include "hybridfpca/simgen.hpp"

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_selection_fixture <out dir>\n";
        return 2;
    }
    const std::filesystem::path out = argv[1];
    const hybridfpca::SelectionFixture fx = hybridfpca::gen_selection_fixture({});
    std::vector<std::string> subjects, regions;
    for (int i = 0; i < fx.tensor.subjects(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%02d", i + 1);
        subjects.emplace_back(buf);
    }
    for (int r = 0; r < fx.tensor.regions(); ++r) regions.push_back("roi" + std::to_string(r + 1));
    hybridfpca::write_tensor_csv(out / "tensor.csv", fx.tensor, subjects, regions);
    for (std::size_t j = 0; j < fx.predictors.size(); ++j) {
        hybridfpca::write_sample_csv(out / ("predictor_" + std::to_string(j + 1) + ".csv"), fx.predictors[j], subjects);
    }
    return 0;
}
