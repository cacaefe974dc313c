"""One small invocation per subcommand, shared by the CLI and acceptance tests."""

CASES = {
    "scan-ratio": ["scan-ratio", "--y-lo", "2", "--y-hi", "3000"],
    "stewart": ["stewart", "--y-hi", "5000", "--c", "0.25"],
    "count": ["count", "--N", "8", "--n", "3", "--psi", "1/3", "--interval", "0,1/2"],
    "measure": ["measure", "--psi", "power:1/gamma", "--n", "9"],
    "cdf": ["cdf", "--x", "1/3,1/4,2/9,5/7"],
    "fourier-verify": ["fourier-verify", "--n", "3", "--k", "2", "--L", "4", "--M", "10", "--T", "8", "--y", "1/7"],
    "product-bound": ["product-bound", "--samples", "300", "--seed", "2"],
    "final-count": ["final-count", "--variant", "upper", "--n", "9", "--k", "1", "--theta", "1/5"],
    "sample-hits": ["sample-hits", "--psi", "power:1", "--base", "3", "--n-max", "200", "--samples", "6", "--seed", "4"],
    "series": ["series", "--series", "main_convergence", "--psi", "log_power:1:1/gamma", "--n-max", "5000"],
    "convergence-audit": ["convergence-audit", "--psi", "const:3/4", "--n-lo", "7", "--n-hi", "11"],
    "chung-erdos": ["chung-erdos", "--psi", "power:1", "--n-lo", "8", "--n-hi", "11", "--ball", "2/9,1/27"],
    "lemma-verify": ["lemma-verify", "connection", "--instances", "5", "--seed", "3"],
}
