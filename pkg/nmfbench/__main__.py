from nmfbench.cli import main

raise SystemExit(main())
